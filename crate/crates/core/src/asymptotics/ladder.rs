//! LdG minimizers over a ladder of eps values, and the quantities compared
//! against the first-order expansion.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{decompose, director_drift, expansion_fit, max_biaxiality, power_fit, relative_l2, trace_component, ExpansionFit, ScalingFit};
use crate::conformal::{b0_conformal_cfield, conformal_field, EscapeConfig};
use crate::energy::{
    b0_limit_correction, b0_q_field, b0_rho_prediction, corrected_minimizer, h0_closed_form, h0_energy, ldg_energy,
    oseen_frank_energy, rho_star, w_ldg, EnergyBreakdown,
};
use crate::grid::stencil::{dirichlet_densities, dirichlet_energy};
use crate::grid::{make_grid, DirectorField, Domain, DomainGrid, QField};
use crate::qtensor::MaterialParams;
use crate::solvers::{harmonic_map_flow, l2_over, ldg_gradient_flow, s4_harmonic_flow, vertical_lift, FlowConfig, SolveReport};
use crate::{Error, Result};

pub const DEFAULT_EPS: [f64; 5] = [0.2, 0.1414, 0.1, 0.0707, 0.05];

/// Planar boundary data of the limit problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryData {
    Conformal(EscapeConfig),
    /// Angle theta + amplitude sin(2 theta), theta the polar angle of the boundary point.
    Perturbed { amplitude: f64 },
}

impl BoundaryData {
    pub fn is_conformal(&self) -> bool {
        matches!(self, BoundaryData::Conformal(_))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LadderConfig {
    pub domain: Domain,
    pub resolution: usize,
    pub boundary: BoundaryData,
    /// The eps field is replaced by each ladder value.
    pub params: MaterialParams,
    pub eps: Vec<f64>,
    pub flow: FlowConfig,
    /// Start each solve from the previous minimizer.
    pub warm_start: bool,
}

impl LadderConfig {
    pub fn reference(resolution: usize) -> Self {
        LadderConfig {
            domain: Domain::Disk,
            resolution,
            boundary: BoundaryData::Conformal(EscapeConfig::radial(1, 0.0)),
            params: MaterialParams::new(1.0, 1.0, 1.0, 0.1).expect("unit params are valid"),
            eps: DEFAULT_EPS.to_vec(),
            flow: FlowConfig::default(),
            warm_start: false,
        }
    }
}

/// The harmonic map n0 with its energy and first-order correction.
#[derive(Clone, Debug)]
pub struct LimitState {
    /// The conformal field or the vertical lift the flow started from.
    pub seed: DirectorField,
    pub n0: DirectorField,
    pub report: SolveReport,
    /// s+^2 \int |grad n0|^2
    pub e0: f64,
    pub h0: f64,
    pub h0_closed: f64,
    /// s+^2 W_LdG of the conformal seed.
    pub w_ldg: Option<f64>,
}

pub fn limit_state(grid: &Arc<DomainGrid>, boundary: &BoundaryData, p: &MaterialParams, flow: &FlowConfig) -> Result<LimitState> {
    let seed = match boundary {
        BoundaryData::Conformal(cfg) => conformal_field(cfg, grid)?,
        BoundaryData::Perturbed { amplitude } => {
            let a = *amplitude;
            vertical_lift(
                grid,
                move |x| {
                    let t = x[1].atan2(x[0]);
                    let phi = t + a * (2.0 * t).sin();
                    [phi.cos(), phi.sin(), 0.0]
                },
                1.0,
            )
        }
    };
    let (n0, report) = harmonic_map_flow(&seed, flow)?;
    let rho = rho_star(&n0, p)?;
    let s2 = p.s_plus().powi(2);
    let w = if boundary.is_conformal() { Some(s2 * w_ldg(&seed, p)?) } else { None };
    Ok(LimitState {
        e0: oseen_frank_energy(&n0, p),
        h0: h0_energy(&n0, &rho, p)?,
        h0_closed: h0_closed_form(&n0, p)?,
        w_ldg: w,
        seed,
        n0,
        report,
    })
}

#[derive(Clone, Debug)]
pub struct LadderStep {
    pub eps: f64,
    pub q: QField,
    pub report: SolveReport,
    /// Renormalized against the limit energy.
    pub energy: EnergyBreakdown,
}

fn solve_step(init: &QField, p: &MaterialParams, e0: f64, flow: &FlowConfig) -> Result<LadderStep> {
    let (q, report) = ldg_gradient_flow(init, p, flow)?;
    let energy = ldg_energy(&q, p).relative_to(e0, p.eps);
    Ok(LadderStep { eps: p.eps, q, report, energy })
}

#[derive(Clone, Debug)]
pub struct LadderRun {
    pub config: LadderConfig,
    pub limit: LimitState,
    pub steps: Vec<LadderStep>,
}

impl LadderRun {
    pub fn grid(&self) -> &Arc<DomainGrid> {
        self.limit.n0.grid()
    }

    pub fn all_converged(&self) -> bool {
        self.limit.report.converged && self.steps.iter().all(|s| s.report.converged)
    }
}

/// Solves the limit problem, then the LdG problem at every eps. Solves that
/// stop at the iteration cap are kept and flagged in their reports.
pub fn run_ladder(cfg: &LadderConfig) -> Result<LadderRun> {
    super::check_ladder(&cfg.eps)?;
    let grid = make_grid(cfg.domain, cfg.resolution)?;
    let limit = limit_state(&grid, &cfg.boundary, &cfg.params, &cfg.flow)?;
    let mut steps: Vec<LadderStep> = Vec::with_capacity(cfg.eps.len());
    for &eps in &cfg.eps {
        let p = cfg.params.with_eps(eps);
        let init = match steps.last() {
            Some(prev) if cfg.warm_start => prev.q.clone(),
            _ if cfg.boundary.is_conformal() => corrected_minimizer(&limit.n0, &p)?,
            _ => limit.n0.uniaxial(p.s_plus()),
        };
        steps.push(solve_step(&init, &p, limit.e0, &cfg.flow)?);
    }
    Ok(LadderRun { config: cfg.clone(), limit, steps })
}

/// Per-eps diagnostics of one minimizer.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StepCheck {
    pub eps: f64,
    pub converged: bool,
    pub iterations: usize,
    pub energy: EnergyBreakdown,
    /// None when the principal eigenvalue degenerates somewhere.
    pub decomposition_error: Option<String>,
    /// The extracted director keeps the sign of n0 . e3 on nodes 3h inside.
    pub on_branch: bool,
    pub drift: Option<f64>,
    /// Interior relative L2 error of rho_3 against the rho_0 prediction.
    pub rho3_error: Option<f64>,
    /// max(|rho_1|, |rho_2|) / |rho_3| in interior L2.
    pub tangential_ratio: Option<f64>,
    pub reconstruction_error: Option<f64>,
    pub f45_relative: Option<f64>,
    pub min_alignment: Option<f64>,
    /// Largest biaxiality gap 3h inside, divided by eps^2.
    pub gap_ratio: f64,
    pub max_gradient: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExpansionCheck {
    pub e0: f64,
    pub h0: f64,
    pub h0_closed: f64,
    pub w_ldg: Option<f64>,
    pub steps: Vec<StepCheck>,
    /// Over the whole ladder.
    pub fit: std::result::Result<ExpansionFit, String>,
    /// Over the steps that stayed on the branch of n0.
    pub branch_fit: std::result::Result<ExpansionFit, String>,
    pub drift_fit: std::result::Result<ScalingFit, String>,
    pub branch_drift_fit: std::result::Result<ScalingFit, String>,
    pub biaxiality_fit: std::result::Result<ScalingFit, String>,
}

impl ExpansionCheck {
    pub fn eps(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.eps).collect()
    }

    pub fn branch_steps(&self) -> impl Iterator<Item = &StepCheck> {
        self.steps.iter().filter(|s| s.on_branch)
    }
}

fn rho_errors(rho: &[[f64; 3]], predicted: &[[f64; 3]], q: &QField, nodes: &[usize]) -> (f64, f64) {
    let comp = |v: &[[f64; 3]], j: usize| v.iter().map(|r| r[j]).collect::<Vec<f64>>();
    let r3 = comp(rho, 2);
    let err = relative_l2(q, nodes, &r3, &comp(predicted, 2));
    let n3 = l2_over(q.grid(), nodes, &r3);
    let tang = l2_over(q.grid(), nodes, &comp(rho, 0)).max(l2_over(q.grid(), nodes, &comp(rho, 1)));
    (err, tang / n3)
}

fn check_step(step: &LadderStep, limit: &LimitState, p: &MaterialParams, predicted: &[[f64; 3]]) -> StepCheck {
    let grid = step.q.grid();
    let inner = grid.interior_beyond(3.0 * grid.h);
    let p = p.with_eps(step.eps);
    let gap_ratio = max_biaxiality(&step.q, &inner) / (step.eps * step.eps);
    let mut out = StepCheck {
        eps: step.eps,
        converged: step.report.converged,
        iterations: step.report.iterations,
        energy: step.energy,
        decomposition_error: None,
        on_branch: false,
        drift: None,
        rho3_error: None,
        tangential_ratio: None,
        reconstruction_error: None,
        f45_relative: None,
        min_alignment: None,
        gap_ratio,
        max_gradient: step.report.max_gradient,
    };
    let dec = match decompose(&step.q, &limit.n0, &p) {
        Ok(d) => d,
        Err(e) => {
            out.decomposition_error = Some(e.to_string());
            return out;
        }
    };
    out.on_branch = inner.iter().all(|&k| dec.n_eps.get(k)[2] * limit.n0.get(k)[2] > 0.0);
    out.drift = director_drift(&dec.n_eps, &limit.n0).ok();
    let (e3, tang) = rho_errors(&dec.rho_eps, predicted, &step.q, &inner);
    out.rho3_error = Some(e3);
    out.tangential_ratio = Some(tang);
    out.reconstruction_error = dec.reconstruction_error(&step.q, &p).ok();
    out.f45_relative = Some(dec.f45_relative(&step.q));
    out.min_alignment = Some(dec.min_alignment(&limit.n0));
    out
}

fn fit_over<'a>(steps: impl Iterator<Item = &'a StepCheck> + Clone, e0: f64) -> std::result::Result<ExpansionFit, String> {
    let eps: Vec<f64> = steps.clone().map(|s| s.eps).collect();
    let e: Vec<f64> = steps.map(|s| s.energy.total).collect();
    expansion_fit(&eps, &e, e0).map_err(|e| e.to_string())
}

fn drift_over<'a>(steps: impl Iterator<Item = &'a StepCheck> + Clone) -> std::result::Result<ScalingFit, String> {
    let eps: Vec<f64> = steps.clone().map(|s| s.eps).collect();
    let mut d = Vec::new();
    for s in steps {
        d.push(s.drift.ok_or_else(|| format!("no director at eps = {}", s.eps))?);
    }
    power_fit(&eps, &d).map_err(|e| e.to_string())
}

pub fn check_expansion(run: &LadderRun) -> Result<ExpansionCheck> {
    let limit = &run.limit;
    let p = run.config.params;
    let predicted = rho_star(&limit.n0, &p)?;
    let steps: Vec<StepCheck> = run.steps.iter().map(|s| check_step(s, limit, &p, &predicted)).collect();
    let eps: Vec<f64> = steps.iter().map(|s| s.eps).collect();
    let gaps: Vec<f64> = steps.iter().map(|s| s.gap_ratio * s.eps * s.eps).collect();
    Ok(ExpansionCheck {
        e0: limit.e0,
        h0: limit.h0,
        h0_closed: limit.h0_closed,
        w_ldg: limit.w_ldg,
        fit: fit_over(steps.iter(), limit.e0),
        branch_fit: fit_over(steps.iter().filter(|s| s.on_branch), limit.e0),
        drift_fit: drift_over(steps.iter()),
        branch_drift_fit: drift_over(steps.iter().filter(|s| s.on_branch)),
        biaxiality_fit: power_fit(&eps, &gaps).map_err(|e| e.to_string()),
        steps,
    })
}

/// The b^2 = 0 problem with c-field boundary data of degree k.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct B0Config {
    pub domain: Domain,
    pub resolution: usize,
    pub k: i32,
    pub points: Vec<[f64; 2]>,
    pub kappa: f64,
    pub params: MaterialParams,
    pub eps: Vec<f64>,
    pub flow: FlowConfig,
}

impl B0Config {
    pub fn reference(resolution: usize, eps: Vec<f64>) -> Self {
        B0Config {
            domain: Domain::Disk,
            resolution,
            k: 1,
            points: vec![[0.0, 0.0]],
            kappa: crate::conformal::KAPPA_PLANAR,
            params: MaterialParams::new(1.0, 0.0, 1.0, 0.1).expect("valid params"),
            eps,
            flow: FlowConfig::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct B0Run {
    pub config: B0Config,
    pub c0: DirectorField,
    pub c_report: SolveReport,
    pub q0: QField,
    /// (1/2) \int |grad Q0|^2
    pub e0: f64,
    /// -(c^2 / 4 a^4) \int |grad Q0|^4
    pub g0: f64,
    pub rho_prediction: Vec<f64>,
    pub steps: Vec<LadderStep>,
}

/// Q0 scaled so that (Q - Q0) : Q0 = eps^2 rho on the interior.
pub fn b0_initial(q0: &QField, rho: &[f64], eps: f64) -> QField {
    q0.with_interior(|k, _| {
        let v = q0.get(k);
        (1.0 + eps * eps * rho[k] / v.norm_sq()) * v
    })
}

pub fn run_b0_ladder(cfg: &B0Config) -> Result<B0Run> {
    super::check_ladder(&cfg.eps)?;
    if cfg.params.b2 != 0.0 {
        return Err(Error::WrongRegime(cfg.params.b2));
    }
    let grid = make_grid(cfg.domain, cfg.resolution)?;
    let seed = b0_conformal_cfield(cfg.k, &cfg.points, cfg.kappa, &grid)?;
    let (c0, c_report) = s4_harmonic_flow(&seed, &cfg.flow)?;
    let q0 = b0_q_field(&c0, &cfg.params);
    let e0 = dirichlet_energy(&grid, q0.values());
    let g0 = b0_limit_correction(&q0, &cfg.params)?;
    let rho_prediction = b0_rho_prediction(&q0, &cfg.params)?;
    let mut steps = Vec::with_capacity(cfg.eps.len());
    for &eps in &cfg.eps {
        let p = cfg.params.with_eps(eps);
        let init = b0_initial(&q0, &rho_prediction, eps);
        steps.push(solve_step(&init, &p, e0, &cfg.flow)?);
    }
    Ok(B0Run { config: cfg.clone(), c0, c_report, q0, e0, g0, rho_prediction, steps })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct B0Check {
    pub e0: f64,
    pub g0: f64,
    pub eps: Vec<f64>,
    pub renormalized: Vec<f64>,
    /// |G_eps / G0 - 1| per eps.
    pub relative_error: Vec<f64>,
    /// Interior relative L2 error of the trace component against the prediction, per eps.
    pub trace_error: Vec<f64>,
    pub converged: Vec<bool>,
    /// Largest c3 over interior nodes of the limit field.
    pub max_c3: f64,
    /// \int |grad Q0|^4 / \int |grad c|^4 and the expected (a^2/c^2)^2.
    pub norm_ratio: (f64, f64),
}

pub fn check_b0(run: &B0Run) -> B0Check {
    let grid = run.q0.grid();
    let inner = grid.interior_beyond(3.0 * grid.h);
    let renormalized: Vec<f64> = run.steps.iter().map(|s| s.energy.renormalized).collect();
    let trace_error = run
        .steps
        .iter()
        .map(|s| relative_l2(&s.q, &inner, &trace_component(&s.q, &run.q0, s.eps), &run.rho_prediction))
        .collect();
    let quartic = |d: Vec<f64>| grid.integrate(&d.iter().map(|g| g * g).collect::<Vec<_>>());
    let c_grad = dirichlet_densities(grid, run.c0.values());
    let q_grad = dirichlet_densities(grid, run.q0.values());
    let p = run.config.params;
    B0Check {
        e0: run.e0,
        g0: run.g0,
        eps: run.steps.iter().map(|s| s.eps).collect(),
        relative_error: renormalized.iter().map(|g| (g / run.g0 - 1.0).abs()).collect(),
        renormalized,
        trace_error,
        converged: run.steps.iter().map(|s| s.report.converged).collect(),
        max_c3: grid.interior().iter().map(|&k| run.c0.get(k)[2]).fold(f64::NEG_INFINITY, f64::max),
        norm_ratio: (quartic(q_grad) / quartic(c_grad), (p.a2 / p.c2).powi(2)),
    }
}

/// The reference disk problem with the control boundary angle theta + 0.5 sin 2 theta.
pub fn control_config(resolution: usize, eps: Vec<f64>) -> LadderConfig {
    LadderConfig { boundary: BoundaryData::Perturbed { amplitude: 0.5 }, eps, ..LadderConfig::reference(resolution) }
}

/// One row of a verification table; `pass` is None for reported-only quantities.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Criterion {
    pub label: String,
    pub value: f64,
    pub target: String,
    pub pass: Option<bool>,
}

fn row(label: &str, value: f64, target: &str, pass: Option<bool>) -> Criterion {
    Criterion { label: label.into(), value, target: target.into(), pass }
}

/// Expansion coefficient, transverse components, drift rate and biaxiality of a ladder.
pub fn expansion_criteria(c: &ExpansionCheck) -> Vec<Criterion> {
    let mut out = Vec::new();
    match &c.fit {
        Ok(f) => {
            let rel = (f.coefficient / c.h0 - 1.0).abs();
            out.push(row("expansion coefficient", f.coefficient, &format!("within 15% of H0 = {:.4}", c.h0), Some(rel <= 0.15)));
        }
        Err(e) => out.push(row(&format!("expansion coefficient ({e})"), f64::NAN, "fit over the ladder", Some(false))),
    }
    if let Ok(f) = &c.branch_fit {
        out.push(row("expansion coefficient, on-branch eps only", f.coefficient, "reported", None));
    }
    let last = c.steps.last();
    match last.and_then(|s| s.rho3_error.zip(s.tangential_ratio)) {
        Some((e3, t)) => {
            out.push(row("rho_3 relative L2 error at smallest eps", e3, "<= 0.1", Some(e3 <= 0.1)));
            out.push(row("tangential / normal rho at smallest eps", t, "<= 0.1", Some(t <= 0.1)));
        }
        None => out.push(row("rho at smallest eps", f64::NAN, "decomposable minimizer", Some(false))),
    }
    match &c.drift_fit {
        Ok(f) => out.push(row("director drift exponent", f.exponent, "> 1", Some(f.exponent > 1.0))),
        Err(e) => out.push(row(&format!("director drift exponent ({e})"), f64::NAN, "> 1", Some(false))),
    }
    if let Ok(f) = &c.branch_drift_fit {
        out.push(row("director drift exponent, on-branch eps only", f.exponent, "reported", None));
    }
    if let (Some(first), Some(last)) = (c.steps.first(), last) {
        let r = first.gap_ratio / last.gap_ratio;
        out.push(row(
            &format!("gap/eps^2 at eps = {} over eps = {}", first.eps, last.eps),
            r,
            ">= 2 for conformal data",
            c.w_ldg.map(|_| r >= 2.0),
        ));
    }
    for s in &c.steps {
        out.push(row(&format!("renormalized energy at eps = {}", s.eps), s.energy.renormalized, if s.on_branch { "on branch" } else { "off branch" }, None));
    }
    out
}

pub fn b0_criteria(c: &B0Check) -> Vec<Criterion> {
    let mut out = vec![row("limit correction G0", c.g0, "reported", None)];
    for ((e, g), (rel, tr)) in c.eps.iter().zip(&c.renormalized).zip(c.relative_error.iter().zip(&c.trace_error)) {
        out.push(row(&format!("renormalized energy at eps = {e}"), *g, &format!("relative error {rel:.4}; trace error {tr:.4}"), None));
    }
    if let (Some(rel), Some(tr)) = (c.relative_error.last(), c.trace_error.last()) {
        out.push(row("renormalized energy vs G0 at smallest eps", *rel, "<= 0.15", Some(*rel <= 0.15)));
        out.push(row("trace component L2 error at smallest eps", *tr, "<= 0.1", Some(*tr <= 0.1)));
    }
    out.push(row("max c3 of the limit field", c.max_c3, "< 0", Some(c.max_c3 < 0.0)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coarse_ladder_tracks_the_prediction() {
        let cfg = LadderConfig { eps: vec![0.1, 0.0707, 0.05], ..LadderConfig::reference(48) };
        let run = run_ladder(&cfg).unwrap();
        assert!(run.all_converged());
        let check = check_expansion(&run).unwrap();
        assert!(check.steps.iter().all(|s| s.on_branch && s.reconstruction_error.unwrap() < 1e-12));
        let fit = check.fit.as_ref().unwrap();
        assert!((fit.coefficient / check.h0 - 1.0).abs() < 0.15, "{fit:?} {}", check.h0);
        assert!((check.w_ldg.unwrap() / check.h0 - 1.0).abs() < 0.05);
        for s in &check.steps {
            assert!(s.energy.total < check.e0);
        }
    }

    #[test]
    fn ladder_validation() {
        let cfg = LadderConfig { eps: vec![0.1, 0.05], ..LadderConfig::reference(32) };
        assert!(matches!(run_ladder(&cfg), Err(Error::BadFit(_))));
        let b0 = B0Config { params: MaterialParams::new(1.0, 1.0, 1.0, 0.1).unwrap(), ..B0Config::reference(32, vec![0.1, 0.07, 0.05]) };
        assert!(matches!(run_b0_ladder(&b0), Err(Error::WrongRegime(_))));
    }

    #[test]
    fn b0_ladder_on_a_coarse_grid() {
        let run = run_b0_ladder(&B0Config::reference(32, vec![0.1, 0.0707, 0.05])).unwrap();
        let check = check_b0(&run);
        assert!(check.max_c3 < 0.0);
        assert!((check.norm_ratio.0 / check.norm_ratio.1 - 1.0).abs() < 1e-12);
        assert!(check.converged.iter().all(|&c| c));
        assert!(check.renormalized.iter().all(|g| *g < 0.0));
    }
}
