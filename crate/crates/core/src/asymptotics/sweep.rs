//! Energies of conformal fields as their escape points move.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::expansion_fit;
use super::ladder::{limit_state, BoundaryData};
use crate::conformal::{conformal_field, EscapeConfig};
use crate::energy::{corrected_minimizer, ldg_energy, oseen_frank_energy, w_ldg};
use crate::grid::DomainGrid;
use crate::qtensor::MaterialParams;
use crate::solvers::{ldg_gradient_flow, FlowConfig};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMode {
    Formula,
    FullSolve,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub cfg_id: usize,
    pub m: i32,
    pub points: Vec<[f64; 2]>,
    /// s+^2 \int |grad n|^2 of the conformal field (formula mode) or of its
    /// discrete harmonic relaxation (full-solve mode).
    pub e0: f64,
    pub w_ldg: f64,
    pub e_eps: Vec<f64>,
    pub fit_coeff: Option<f64>,
    pub fit_exponent: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub mode: SweepMode,
    pub eps: Vec<f64>,
    pub rows: Vec<SweepRow>,
}

/// Escape points as "x1,y1;x2,y2".
pub fn format_points(points: &[[f64; 2]]) -> String {
    points.iter().map(|p| format!("{},{}", p[0], p[1])).collect::<Vec<_>>().join(";")
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl SweepTable {
    pub fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = ["cfg_id", "m", "points", "E0", "W_ldg"].iter().map(|s| s.to_string()).collect();
        h.extend(self.eps.iter().map(|e| format!("E_eps(eps={e})")));
        h.push("fit_coeff".into());
        h.push("fit_exponent".into());
        h
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(self.header()).map_err(io)?;
        for r in &self.rows {
            let mut rec = vec![r.cfg_id.to_string(), r.m.to_string(), format_points(&r.points), r.e0.to_string(), r.w_ldg.to_string()];
            rec.extend(r.e_eps.iter().map(|e| e.to_string()));
            rec.push(opt(r.fit_coeff));
            rec.push(opt(r.fit_exponent));
            w.write_record(&rec).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn column(&self, f: impl Fn(&SweepRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }
}

/// One escape point at each radius on the positive x axis.
pub fn radius_sweep(radii: &[f64]) -> Vec<EscapeConfig> {
    radii.iter().map(|&r| EscapeConfig::new(1, vec![[r, 0.0]])).collect()
}

/// Two escape points at (+-d/2, 0) for each separation d.
pub fn separation_sweep(separations: &[f64]) -> Vec<EscapeConfig> {
    separations.iter().map(|&d| EscapeConfig::new(2, vec![[0.5 * d, 0.0], [-0.5 * d, 0.0]])).collect()
}

pub fn escape_sweep(
    configs: &[EscapeConfig],
    grid: &Arc<DomainGrid>,
    p: &MaterialParams,
    mode: SweepMode,
    eps: &[f64],
    flow: &FlowConfig,
) -> Result<SweepTable> {
    let eps = match mode {
        SweepMode::Formula => Vec::new(),
        SweepMode::FullSolve => {
            super::check_ladder(eps)?;
            eps.to_vec()
        }
    };
    let mut rows = Vec::with_capacity(configs.len());
    for (id, cfg) in configs.iter().enumerate() {
        let n = conformal_field(cfg, grid)?;
        let w = w_ldg(&n, p)?;
        let mut row = SweepRow {
            cfg_id: id,
            m: cfg.m,
            points: cfg.points.clone(),
            e0: oseen_frank_energy(&n, p),
            w_ldg: w,
            e_eps: Vec::new(),
            fit_coeff: None,
            fit_exponent: None,
        };
        if mode == SweepMode::FullSolve {
            let limit = limit_state(grid, &BoundaryData::Conformal(cfg.clone()), p, flow)?;
            row.e0 = limit.e0;
            for &e in &eps {
                let pe = p.with_eps(e);
                let (q, _) = ldg_gradient_flow(&corrected_minimizer(&limit.n0, &pe)?, &pe, flow)?;
                row.e_eps.push(ldg_energy(&q, &pe).total);
            }
            let fit = expansion_fit(&eps, &row.e_eps, row.e0)?;
            row.fit_coeff = Some(fit.coefficient);
            row.fit_exponent = Some(fit.power.exponent);
        }
        rows.push(row);
    }
    Ok(SweepTable { mode, eps, rows })
}
