//! Minimizers for the discrete Dirichlet and Landau-de Gennes energies with
//! Dirichlet data on the boundary band.
//!
//! The discrete energy is E(u) = sum_i c_i sum_{j ~ i} |u_j - u_i|^2 + eps^-2 sum_i w_i f(u_i)
//! over interior nodes i, with c_i = w_i / 4h^2. Its gradient at node k is
//! sum_j 2 (c_k + c_j) (u_k - u_j) plus the bulk term, and dividing by the lumped
//! mass m_k = D_k h^2 / 4 (D_k the diagonal of the elastic part) gives the
//! strong-form residual.

mod ldg;
mod sphere;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use ldg::ldg_gradient_flow;
pub use sphere::{harmonic_map_flow, s4_harmonic_flow, vertical_lift};

use crate::grid::stencil::{laplacian_unchecked, NodeValue};
use crate::grid::DomainGrid;
use crate::qtensor::MaterialParams;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepPolicy {
    /// Explicit step with a fixed tau.
    Fixed { tau: f64 },
    /// Explicit step, tau halved whenever the energy would increase.
    Backtracking { tau: f64 },
    /// Preconditioned nonlinear conjugate gradients.
    ConjugateGradient,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub policy: StepPolicy,
    pub max_iterations: usize,
    /// Relative energy decrease over `window` iterations below which the solve stops.
    pub energy_tol: f64,
    pub window: usize,
    /// Stop once the residual is below residual_tol * (initial residual).
    pub residual_tol: f64,
    /// Stop once the residual is below this absolute value.
    pub residual_abs: f64,
    /// Energy recorded every `history_stride` accepted iterations.
    pub history_stride: usize,
    pub init: String,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            policy: StepPolicy::ConjugateGradient,
            max_iterations: 20_000,
            energy_tol: 1e-10,
            window: 100,
            residual_tol: 1e-6,
            residual_abs: 1e-10,
            history_stride: 10,
            init: "given".into(),
        }
    }
}

/// Spectral bound of the bulk Hessian near the limit manifold.
pub fn bulk_hessian_bound(p: &MaterialParams) -> f64 {
    let s = p.s_plus();
    2.0 * p.a2 + 3.0 * p.b2 * s + 6.0 * p.c2 * s * s
}

pub fn stable_tau_sphere(h: f64) -> f64 {
    h * h / 4.0
}

pub fn stable_tau_ldg(h: f64, p: &MaterialParams) -> f64 {
    (h * h / 4.0).min(p.eps * p.eps / (2.0 * bulk_hessian_bound(p)))
}

impl FlowConfig {
    pub fn with_policy(policy: StepPolicy) -> Self {
        FlowConfig { policy, ..Default::default() }
    }

    fn validate(&self, tau_max: f64) -> Result<()> {
        if self.max_iterations == 0 || self.window == 0 || self.history_stride == 0 {
            return Err(Error::InvalidParams("iteration counts must be positive".into()));
        }
        match self.policy {
            StepPolicy::Fixed { tau } | StepPolicy::Backtracking { tau } if !(tau > 0.0) => {
                Err(Error::InvalidParams(format!("step {tau} must be positive")))
            }
            StepPolicy::Fixed { tau } if tau > tau_max * (1.0 + 1e-12) => {
                Err(Error::InvalidParams(format!("fixed step {tau:.3e} exceeds the stability bound {tau_max:.3e}")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub converged: bool,
    /// "residual", "energy", "stalled" or "max_iterations".
    pub stop_reason: String,
    pub initial_energy: f64,
    pub final_energy: f64,
    pub initial_residual: f64,
    pub final_residual: f64,
    pub energy_history: Vec<f64>,
    /// Largest energy change over an accepted step (non-positive for a descent).
    pub max_increase: f64,
    pub rejected_steps: usize,
    pub wall_time_s: f64,
    pub init: String,
    /// Whether n . e3 kept one sign (sphere-valued solves only).
    pub sign_definite: Option<bool>,
    /// Largest nodal |grad u| (forward differences).
    pub max_gradient: f64,
}

impl SolveReport {
    pub fn ensure_converged(&self) -> Result<()> {
        if self.converged {
            Ok(())
        } else {
            Err(Error::NoConvergence { iterations: self.iterations, residual: self.final_residual })
        }
    }
}

/// Bookkeeping shared by the solvers.
struct Monitor<'a> {
    cfg: &'a FlowConfig,
    start: Instant,
    history: Vec<f64>,
    recent: Vec<f64>,
    initial_energy: f64,
    initial_residual: f64,
    energy: f64,
    accepted: usize,
    rejected: usize,
    max_increase: f64,
}

impl<'a> Monitor<'a> {
    fn new(cfg: &'a FlowConfig, energy: f64, residual: f64) -> Self {
        Monitor {
            cfg,
            start: Instant::now(),
            history: vec![energy],
            recent: vec![energy],
            initial_energy: energy,
            initial_residual: residual,
            energy,
            accepted: 0,
            rejected: 0,
            max_increase: f64::NEG_INFINITY,
        }
    }

    fn accept(&mut self, energy: f64) {
        self.max_increase = self.max_increase.max(energy - self.energy);
        self.energy = energy;
        self.accepted += 1;
        if self.accepted % self.cfg.history_stride == 0 {
            self.history.push(energy);
        }
        self.recent.push(energy);
        if self.recent.len() > self.cfg.window + 1 {
            self.recent.remove(0);
        }
    }

    /// Stop reason, if any, given the current residual.
    fn check(&self, residual: f64) -> Option<&'static str> {
        if residual <= self.cfg.residual_abs.max(self.cfg.residual_tol * self.initial_residual) {
            return Some("residual");
        }
        if self.recent.len() == self.cfg.window + 1 {
            let drop = self.recent[0] - self.energy;
            if drop <= self.cfg.energy_tol * self.energy.abs().max(1e-300) {
                return Some("energy");
            }
        }
        None
    }

    fn finish(mut self, reason: &str, residual: f64, sign_definite: Option<bool>, max_gradient: f64) -> SolveReport {
        if self.history.last() != Some(&self.energy) {
            self.history.push(self.energy);
        }
        SolveReport {
            iterations: self.accepted,
            converged: reason != "max_iterations",
            stop_reason: reason.into(),
            initial_energy: self.initial_energy,
            final_energy: self.energy,
            initial_residual: self.initial_residual,
            final_residual: residual,
            energy_history: self.history,
            max_increase: if self.accepted == 0 { 0.0 } else { self.max_increase },
            rejected_steps: self.rejected,
            wall_time_s: self.start.elapsed().as_secs_f64(),
            init: self.cfg.init.clone(),
            sign_definite,
            max_gradient,
        }
    }
}

/// Elastic coefficients c_i, diagonal D_k and lumped mass m_k.
pub(crate) struct Stiffness {
    pub coef: Vec<f64>,
    pub diag: Vec<f64>,
    pub mass: Vec<f64>,
}

impl Stiffness {
    pub fn new(grid: &DomainGrid) -> Self {
        let total = grid.node_count();
        let ih2 = 1.0 / (4.0 * grid.h * grid.h);
        let mut coef = vec![0.0; total];
        for &k in grid.interior() {
            coef[k] = grid.weights()[k] * ih2;
        }
        let mut diag = vec![0.0; total];
        let mut mass = vec![0.0; total];
        for &k in grid.interior() {
            diag[k] = grid.neighbors(k).iter().map(|&j| 2.0 * (coef[k] + coef[j])).sum();
            mass[k] = diag[k] * grid.h * grid.h / 4.0;
        }
        Stiffness { coef, diag, mass }
    }

    /// Gradient of sum_i c_i sum_j |u_j - u_i|^2 at interior nodes (zero elsewhere).
    pub fn gradient<T: NodeValue>(&self, grid: &DomainGrid, u: &[T], out: &mut [T]) {
        for &k in grid.interior() {
            let mut acc = T::default();
            for &j in &grid.neighbors(k) {
                let diff = T::combine(1.0, &u[k], -1.0, &u[j]);
                acc = T::combine(1.0, &acc, 2.0 * (self.coef[k] + self.coef[j]), &diff);
            }
            out[k] = acc;
        }
    }
}

pub(crate) fn interior_dot<T: NodeValue>(grid: &DomainGrid, a: &[T], b: &[T]) -> f64 {
    let v: Vec<f64> = grid.interior().iter().map(|&k| a[k].dot(&b[k])).collect();
    crate::sum::pairwise(&v)
}

/// sqrt(sum_k |g_k|^2 / m_k).
pub(crate) fn residual_norm<T: NodeValue>(grid: &DomainGrid, st: &Stiffness, g: &[T]) -> f64 {
    let v: Vec<f64> = grid.interior().iter().map(|&k| g[k].norm_sq() / st.mass[k]).collect();
    crate::sum::pairwise(&v).sqrt()
}

pub(crate) fn max_forward_gradient<T: NodeValue>(grid: &DomainGrid, u: &[T]) -> f64 {
    let mut worst: f64 = 0.0;
    for &k in grid.interior() {
        for &j in &grid.neighbors(k) {
            worst = worst.max(T::combine(1.0, &u[j], -1.0, &u[k]).norm_sq());
        }
    }
    worst.sqrt() / grid.h
}

/// Nodewise |Delta u + |grad u|^2 u / |u|^2| for sphere-valued fields.
fn harmonic_residuals<T: NodeValue>(grid: &DomainGrid, u: &[T]) -> Vec<f64> {
    let mut out = vec![0.0; grid.node_count()];
    for &k in grid.interior() {
        let lap = laplacian_unchecked(grid, u, k);
        let g = crate::grid::stencil::dirichlet_density(grid, u, k);
        let r2 = u[k].norm_sq();
        let r = if r2 > 0.0 { T::combine(1.0, &lap, g / r2, &u[k]) } else { lap };
        out[k] = r.norm_sq().sqrt();
    }
    out
}

pub fn residuals(n: &crate::grid::DirectorField) -> Vec<f64> {
    harmonic_residuals(n.grid(), n.values())
}

pub fn q_residuals(q: &crate::grid::QField) -> Vec<f64> {
    harmonic_residuals(q.grid(), q.values())
}

/// L2 norm of nodal values over a node set.
pub fn l2_over(grid: &DomainGrid, nodes: &[usize], v: &[f64]) -> f64 {
    let sq: Vec<f64> = v.iter().map(|x| x * x).collect();
    grid.integrate_over(nodes, &sq).sqrt()
}

/// Real roots of a + b t + c t^2 + d t^3 with d != 0, ascending.
pub(crate) fn cubic_roots(a: f64, b: f64, c: f64, d: f64) -> Vec<f64> {
    let (p2, p1, p0) = (c / d, b / d, a / d);
    // t = y - p2/3: y^3 + p y + q = 0
    let p = p1 - p2 * p2 / 3.0;
    let q = 2.0 * p2 * p2 * p2 / 27.0 - p2 * p1 / 3.0 + p0;
    let shift = -p2 / 3.0;
    let disc = q * q / 4.0 + p * p * p / 27.0;
    let mut roots = if disc > 0.0 {
        let sq = disc.sqrt();
        vec![(-q / 2.0 + sq).cbrt() + (-q / 2.0 - sq).cbrt() + shift]
    } else if p == 0.0 {
        vec![shift]
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let th = arg.acos() / 3.0;
        (0..3).map(|j| m * (th - std::f64::consts::TAU * j as f64 / 3.0).cos() + shift).collect()
    };
    // one Newton polish each
    for r in roots.iter_mut() {
        let f = a + *r * (b + *r * (c + *r * d));
        let df = b + *r * (2.0 * c + 3.0 * d * *r);
        if df != 0.0 {
            *r -= f / df;
        }
    }
    roots.sort_by(f64::total_cmp);
    roots
}

/// First local minimizer t > 0 of c0 + c1 t + c2 t^2 + c3 t^3 + c4 t^4 when c1 < 0.
pub(crate) fn quartic_line_min(c: &[f64; 5]) -> Option<f64> {
    if c[4] > 0.0 {
        let roots = cubic_roots(c[1], 2.0 * c[2], 3.0 * c[3], 4.0 * c[4]);
        roots.into_iter().find(|&t| t > 0.0 && 2.0 * c[2] + 6.0 * c[3] * t + 12.0 * c[4] * t * t >= 0.0)
    } else if c[2] > 0.0 && c[3] == 0.0 {
        Some(-c[1] / (2.0 * c[2]))
    } else {
        None
    }
}
