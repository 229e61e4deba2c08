//! Decomposition of computed minimizers and fits of their eps-scaling.

pub mod ladder;
pub mod sweep;

use serde::{Deserialize, Serialize};

use crate::grid::stencil::dirichlet_energy;
use crate::grid::{DirectorField, QField};
use crate::qtensor::{self, biaxiality_gap, eigendecompose, rotation_to, transpose, uniaxial, MaterialParams, Vec3};
use crate::{Error, Result};

/// Q = Q[n_eps] + eps^2 R V_rho R^t, node by node.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub n_eps: DirectorField,
    pub rho_eps: Vec<Vec3>,
    /// |(F4, F5) components| of R^t (Q - Q[n]) R.
    pub f45_residual: Vec<f64>,
    /// Principal minus middle eigenvalue.
    pub eigen_gap: Vec<f64>,
}

const MIN_GAP: f64 = 1e-6;

/// Newton steps on the principal eigenvector, so that the off-diagonal (F4, F5) block
/// of R^t Q R drops to rounding even when the eigenvalue gap is small.
fn refine(m: &qtensor::Mat3, mut v: Vec3) -> Result<Vec3> {
    for _ in 0..2 {
        let r = rotation_to(&v)?;
        let d = qtensor::mat_mul(&transpose(&r), &qtensor::mat_mul(m, &r));
        let l = d[2][2];
        let (a, b, c) = (l - d[0][0], -d[0][1], l - d[1][1]);
        let det = a * c - b * b;
        if det.abs() < 1e-300 {
            break;
        }
        let (x, y) = ((c * d[0][2] - b * d[1][2]) / det, (a * d[1][2] - b * d[0][2]) / det);
        let step: Vec3 = std::array::from_fn(|i| x * r[i][0] + y * r[i][1]);
        v = qtensor::normalize(&qtensor::add(&v, &step));
    }
    Ok(v)
}

pub fn decompose(q: &QField, n0: &DirectorField, p: &MaterialParams) -> Result<Decomposition> {
    let grid = q.grid();
    if !grid.same_layout(n0.grid()) {
        return Err(Error::GridMismatch("Q field and reference director live on different grids".into()));
    }
    let s = p.s_plus();
    let e2 = p.eps * p.eps;
    let total = grid.node_count();
    let mut n = vec![[0.0; 3]; total];
    let mut rho = vec![[0.0; 3]; total];
    let mut f45 = vec![0.0; total];
    let mut gap = vec![0.0; total];
    for k in (0..total).filter(|&k| grid.is_active(k)) {
        let qk = q.get(k);
        let es = eigendecompose(&qk);
        let g = es.values[0] - es.values[1];
        if g <= MIN_GAP {
            return Err(Error::DegenerateSpectrum { gap: g, node: Some(k) });
        }
        let v = es.vectors[0];
        let v = if qtensor::dot(&v, &n0.get(k)) < 0.0 { qtensor::scale(-1.0, &v) } else { v };
        let v = refine(&qk.to_matrix(), v)?;
        let r = rotation_to(&v)?;
        let d = (qk - uniaxial(&v, s)).rotated(&transpose(&r));
        n[k] = v;
        rho[k] = [d.0[0] / e2, d.0[1] / e2, d.0[2] / e2];
        f45[k] = d.0[3].hypot(d.0[4]);
        gap[k] = g;
    }
    Ok(Decomposition { n_eps: DirectorField::new(grid.clone(), n)?, rho_eps: rho, f45_residual: f45, eigen_gap: gap })
}

impl Decomposition {
    /// Largest relative nodewise error of Q[n_eps] + eps^2 R V_rho R^t against `q`.
    pub fn reconstruction_error(&self, q: &QField, p: &MaterialParams) -> Result<f64> {
        let grid = q.grid();
        let (s, e2) = (p.s_plus(), p.eps * p.eps);
        let mut worst: f64 = 0.0;
        for k in (0..grid.node_count()).filter(|&k| grid.is_active(k)) {
            let n = self.n_eps.get(k);
            let r = rotation_to(&n)?;
            let rebuilt = uniaxial(&n, s) + e2 * qtensor::v_rho(&self.rho_eps[k]).rotated(&r);
            let qk = q.get(k);
            worst = worst.max((rebuilt - qk).norm() / qk.norm().max(f64::MIN_POSITIVE));
        }
        Ok(worst)
    }

    /// Largest |F4, F5| residual relative to |Q|.
    pub fn f45_relative(&self, q: &QField) -> f64 {
        let grid = q.grid();
        (0..grid.node_count())
            .filter(|&k| grid.is_active(k))
            .map(|k| self.f45_residual[k] / q.get(k).norm().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }

    /// Smallest n_eps . n0 over the active nodes.
    pub fn min_alignment(&self, n0: &DirectorField) -> f64 {
        let grid = n0.grid();
        (0..grid.node_count())
            .filter(|&k| grid.is_active(k))
            .map(|k| qtensor::dot(&self.n_eps.get(k), &n0.get(k)))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Discrete H^1_0 seminorm of n_eps - n0.
pub fn director_drift(n_eps: &DirectorField, n0: &DirectorField) -> Result<f64> {
    if !n_eps.grid().same_layout(n0.grid()) {
        return Err(Error::GridMismatch("director fields live on different grids".into()));
    }
    let diff: Vec<Vec3> = n_eps.values().iter().zip(n0.values()).map(|(a, b)| qtensor::sub(a, b)).collect();
    Ok((2.0 * dirichlet_energy(n_eps.grid(), &diff)).sqrt())
}

/// Relative interior L2 error of `a` against `b`, both sampled per node.
pub fn relative_l2(q: &QField, nodes: &[usize], a: &[f64], b: &[f64]) -> f64 {
    let grid = q.grid();
    let total = grid.node_count();
    let mut num = vec![0.0; total];
    let mut den = vec![0.0; total];
    for &k in nodes {
        num[k] = (a[k] - b[k]).powi(2);
        den[k] = b[k] * b[k];
    }
    (grid.integrate_over(nodes, &num) / grid.integrate_over(nodes, &den)).sqrt()
}

/// Power-law fit |observable| ~ coefficient * eps^exponent, least squares in log-log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub eps: Vec<f64>,
    pub values: Vec<f64>,
    pub exponent: f64,
    pub coefficient: f64,
    /// RMS of the log residuals.
    pub residual: f64,
    /// All samples were below the fitting floor; exponent and coefficient are 0.
    pub below_floor: bool,
}

pub const FIT_FLOOR: f64 = 1e-13;

pub(crate) fn check_ladder(eps: &[f64]) -> Result<()> {
    if eps.len() < 3 {
        return Err(Error::BadFit(format!("{} eps samples; at least 3 are needed", eps.len())));
    }
    if eps.windows(2).any(|w| w[1] >= w[0]) || eps.iter().any(|e| *e <= 0.0) {
        return Err(Error::BadFit("eps samples must be positive and strictly decreasing".into()));
    }
    Ok(())
}

/// Least-squares line y = a + b x.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let rms = (x.iter().zip(y).map(|(u, v)| (v - a - b * u).powi(2)).sum::<f64>() / n).sqrt();
    (a, b, rms)
}

pub fn power_fit(eps: &[f64], values: &[f64]) -> Result<ScalingFit> {
    check_ladder(eps)?;
    if values.len() != eps.len() {
        return Err(Error::BadFit(format!("{} values for {} eps samples", values.len(), eps.len())));
    }
    if values.iter().all(|v| v.abs() < FIT_FLOOR) {
        return Ok(ScalingFit {
            eps: eps.to_vec(),
            values: values.to_vec(),
            exponent: 0.0,
            coefficient: 0.0,
            residual: 0.0,
            below_floor: true,
        });
    }
    if values.iter().any(|v| v.abs() < FIT_FLOOR || !v.is_finite()) {
        return Err(Error::BadFit("some samples vanish or are not finite".into()));
    }
    let x: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.abs().ln()).collect();
    let (a, b, rms) = linear_fit(&x, &y);
    Ok(ScalingFit { eps: eps.to_vec(), values: values.to_vec(), exponent: b, coefficient: a.exp(), residual: rms, below_floor: false })
}

/// Fit of the renormalized energies (E_eps - E0) / eps^2 against eps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionFit {
    pub reference: f64,
    pub renormalized: Vec<f64>,
    /// Limit eps -> 0 of the least-squares line G = coefficient + slope * eps.
    pub coefficient: f64,
    pub slope: f64,
    pub mean: f64,
    /// |E_eps - E0| against eps; the exponent should be close to 2.
    pub power: ScalingFit,
}

pub const MAX_LOG_RESIDUAL: f64 = 0.1;

pub fn expansion_fit(eps: &[f64], energies: &[f64], e0: f64) -> Result<ExpansionFit> {
    let diffs: Vec<f64> = energies.iter().map(|e| e - e0).collect();
    let power = power_fit(eps, &diffs)?;
    if power.residual > MAX_LOG_RESIDUAL {
        return Err(Error::BadFit(format!("log-log residual {} exceeds {MAX_LOG_RESIDUAL}", power.residual)));
    }
    let g: Vec<f64> = diffs.iter().zip(eps).map(|(d, e)| d / (e * e)).collect();
    let (coefficient, slope, _) = linear_fit(eps, &g);
    let mean = g.iter().sum::<f64>() / g.len() as f64;
    Ok(ExpansionFit { reference: e0, renormalized: g, coefficient, slope, mean, power })
}

/// Largest biaxiality gap over `nodes`.
pub fn max_biaxiality(q: &QField, nodes: &[usize]) -> f64 {
    nodes.iter().map(|&k| biaxiality_gap(&q.get(k))).fold(0.0, f64::max)
}

/// Power fit of the largest biaxiality gap (nodes farther than 3h from the boundary).
pub fn biaxiality_scaling(eps: &[f64], minimizers: &[QField]) -> Result<ScalingFit> {
    let gaps: Vec<f64> = minimizers
        .iter()
        .map(|q| {
            let nodes = q.grid().interior_beyond(3.0 * q.grid().h);
            max_biaxiality(q, &nodes)
        })
        .collect();
    power_fit(eps, &gaps)
}

/// Nodewise (Q - Q0) : Q0 / eps^2.
pub fn trace_component(q: &QField, q0: &QField, eps: f64) -> Vec<f64> {
    let e2 = eps * eps;
    q.values().iter().zip(q0.values()).map(|(a, b)| (*a - *b).dot(b) / e2).collect()
}
