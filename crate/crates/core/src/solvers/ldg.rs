//! Descent on the discrete Landau-de Gennes energy.

use super::{
    bulk_hessian_bound, interior_dot, max_forward_gradient, quartic_line_min, residual_norm, stable_tau_ldg, FlowConfig,
    Monitor, SolveReport, Stiffness, StepPolicy,
};
use crate::energy::ldg_energy_values;
use crate::grid::stencil::dirichlet_energy;
use crate::grid::{DomainGrid, QField};
use crate::qtensor::{bulk_gradient, bulk_line_coeffs, MaterialParams, QVec};
use crate::sum::pairwise;
use crate::{Error, Result};

struct Problem<'a> {
    grid: &'a DomainGrid,
    st: Stiffness,
    p: MaterialParams,
    ie2: f64,
}

impl Problem<'_> {
    fn energy(&self, u: &[QVec]) -> f64 {
        ldg_energy_values(self.grid, u, &self.p).total
    }

    fn gradient(&self, u: &[QVec], g: &mut [QVec]) {
        self.st.gradient(self.grid, u, g);
        let w = self.grid.weights();
        for &k in self.grid.interior() {
            g[k] += (self.ie2 * w[k]) * bulk_gradient(&u[k], &self.p);
        }
    }

    /// Coefficients of t -> E(u + t d).
    fn line(&self, u: &[QVec], d: &[QVec], slope: f64, e: f64) -> [f64; 5] {
        let w = self.grid.weights();
        let interior = self.grid.interior();
        let mut parts = [vec![0.0; interior.len()], vec![0.0; interior.len()], vec![0.0; interior.len()]];
        for (i, &k) in interior.iter().enumerate() {
            let c = bulk_line_coeffs(&u[k], &d[k], &self.p);
            for j in 0..3 {
                parts[j][i] = w[k] * c[j + 2];
            }
        }
        [
            e,
            slope,
            dirichlet_energy(self.grid, d) + self.ie2 * pairwise(&parts[0]),
            self.ie2 * pairwise(&parts[1]),
            self.ie2 * pairwise(&parts[2]),
        ]
    }

    fn step(&self, u: &[QVec], d: &[QVec], t: f64, out: &mut [QVec]) {
        for &k in self.grid.interior() {
            out[k] = u[k] + t * d[k];
        }
    }
}

/// Minimizes E_eps over Q fields with the band values of `init` held fixed.
pub fn ldg_gradient_flow(init: &QField, p: &MaterialParams, cfg: &FlowConfig) -> Result<(QField, SolveReport)> {
    p.validate()?;
    let grid = init.grid().clone();
    cfg.validate(stable_tau_ldg(grid.h, p))?;
    let prob = Problem { grid: &grid, st: Stiffness::new(&grid), p: *p, ie2: 1.0 / (p.eps * p.eps) };
    let total = grid.node_count();
    let lambda = bulk_hessian_bound(p);
    let precond: Vec<f64> = (0..total).map(|k| prob.st.diag[k] + prob.ie2 * grid.weights()[k] * lambda).collect();
    let mut u = init.values().to_vec();
    let mut trial = u.clone();
    let mut g = vec![QVec::ZERO; total];
    prob.gradient(&u, &mut g);
    let mut residual = residual_norm(&grid, &prob.st, &g);
    let mut mon = Monitor::new(cfg, prob.energy(&u), residual);
    let mut z = vec![QVec::ZERO; total];
    let mut d = vec![QVec::ZERO; total];
    let mut g_old = g.clone();
    let mut zg_old = 0.0;
    let mut tau = match cfg.policy {
        StepPolicy::Fixed { tau } | StepPolicy::Backtracking { tau } => tau,
        StepPolicy::ConjugateGradient => 0.0,
    };
    let mut reason = "max_iterations";
    for _ in 0..cfg.max_iterations {
        if let Some(r) = mon.check(residual) {
            reason = r;
            break;
        }
        let e = mon.energy;
        match cfg.policy {
            StepPolicy::Fixed { .. } | StepPolicy::Backtracking { .. } => {
                for &k in grid.interior() {
                    d[k] = (-1.0 / prob.st.mass[k]) * g[k];
                }
                let fixed = matches!(cfg.policy, StepPolicy::Fixed { .. });
                let mut accepted = None;
                while tau >= 1e-12 {
                    prob.step(&u, &d, tau, &mut trial);
                    let et = prob.energy(&trial);
                    if fixed || et <= e {
                        accepted = Some(et);
                        break;
                    }
                    tau *= 0.5;
                    mon.rejected += 1;
                }
                match accepted {
                    Some(et) => {
                        std::mem::swap(&mut u, &mut trial);
                        mon.accept(et);
                    }
                    None => return Err(Error::StepUnderflow(tau)),
                }
            }
            StepPolicy::ConjugateGradient => {
                for &k in grid.interior() {
                    z[k] = (1.0 / precond[k]) * g[k];
                }
                let zg = interior_dot(&grid, &z, &g);
                let beta = if zg_old > 0.0 {
                    let v: Vec<f64> = grid.interior().iter().map(|&k| z[k].dot(&(g[k] - g_old[k]))).collect();
                    (pairwise(&v) / zg_old).max(0.0)
                } else {
                    0.0
                };
                let mut steepest = beta == 0.0;
                for &k in grid.interior() {
                    d[k] = beta * d[k] - z[k];
                }
                let mut slope = interior_dot(&grid, &g, &d);
                if slope >= 0.0 {
                    for &k in grid.interior() {
                        d[k] = -z[k];
                    }
                    slope = -zg;
                    steepest = true;
                }
                let mut accepted = None;
                loop {
                    let c = prob.line(&u, &d, slope, e);
                    if let Some(mut t) = quartic_line_min(&c) {
                        for _ in 0..8 {
                            prob.step(&u, &d, t, &mut trial);
                            let et = prob.energy(&trial);
                            if et <= e {
                                accepted = Some(et);
                                break;
                            }
                            t *= 0.5;
                            mon.rejected += 1;
                        }
                    }
                    if accepted.is_some() || steepest {
                        break;
                    }
                    for &k in grid.interior() {
                        d[k] = -z[k];
                    }
                    slope = -zg;
                    steepest = true;
                }
                match accepted {
                    Some(et) => {
                        std::mem::swap(&mut u, &mut trial);
                        mon.accept(et);
                    }
                    None => {
                        reason = "stalled";
                        break;
                    }
                }
                zg_old = zg;
                g_old.copy_from_slice(&g);
            }
        }
        prob.gradient(&u, &mut g);
        residual = residual_norm(&grid, &prob.st, &g);
    }
    let maxg = max_forward_gradient(&grid, &u);
    let report = mon.finish(reason, residual, None, maxg);
    Ok((QField::new(grid.clone(), u)?, report))
}
