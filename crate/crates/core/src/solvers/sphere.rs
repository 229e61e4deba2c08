//! Sphere-valued minimization of the discrete Dirichlet energy.

use super::{interior_dot, max_forward_gradient, residual_norm, stable_tau_sphere, FlowConfig, Monitor, SolveReport, Stiffness, StepPolicy};
use crate::grid::stencil::dirichlet_energy;
use crate::grid::{DirectorField, DomainGrid};
use crate::qtensor::{dot, normalize, Vec3};
use crate::{Error, Result};

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 40;

/// Interior values blend the boundary direction at the closest boundary point
/// into sign * e3 over a quarter of the domain's half-width.
pub fn vertical_lift(grid: &std::sync::Arc<DomainGrid>, boundary: impl Fn([f64; 2]) -> Vec3, sign: f64) -> DirectorField {
    let [hx, hy] = grid.domain.half_extent();
    let width = 0.25 * hx.min(hy);
    let domain = grid.domain;
    DirectorField::from_fns(
        grid.clone(),
        |x| {
            let b = normalize(&boundary(domain.closest_boundary_point(x)));
            let lam = (1.0 - domain.boundary_distance(x) / width).max(0.0);
            [lam * b[0], lam * b[1], lam * b[2] + (1.0 - lam) * sign]
        },
        |x| boundary(x),
    )
}

struct Problem<'a> {
    grid: &'a DomainGrid,
    st: Stiffness,
}

impl Problem<'_> {
    fn energy(&self, n: &[Vec3]) -> f64 {
        dirichlet_energy(self.grid, n)
    }

    /// Euclidean and tangential gradients.
    fn gradients(&self, n: &[Vec3], g: &mut [Vec3], pg: &mut [Vec3]) {
        self.st.gradient(self.grid, n, g);
        for &k in self.grid.interior() {
            let c = dot(&g[k], &n[k]);
            pg[k] = [g[k][0] - c * n[k][0], g[k][1] - c * n[k][1], g[k][2] - c * n[k][2]];
        }
    }

    fn retract(&self, n: &[Vec3], d: &[Vec3], t: f64, out: &mut [Vec3]) -> Result<()> {
        for &k in self.grid.interior() {
            let v = [n[k][0] + t * d[k][0], n[k][1] + t * d[k][1], n[k][2] + t * d[k][2]];
            let len = dot(&v, &v).sqrt();
            if len < 0.5 {
                return Err(Error::NormCollapse(len));
            }
            out[k] = [v[0] / len, v[1] / len, v[2] / len];
        }
        Ok(())
    }
}

fn sign_definite(grid: &DomainGrid, n: &[Vec3]) -> Option<i8> {
    let mut sign = 0i8;
    for &k in grid.interior() {
        let s = if n[k][2] > 0.0 {
            1
        } else if n[k][2] < 0.0 {
            -1
        } else {
            return None;
        };
        if sign == 0 {
            sign = s;
        } else if sign != s {
            return None;
        }
    }
    Some(sign)
}

/// Minimizes the Dirichlet energy over unit fields with the band values held fixed.
pub fn harmonic_map_flow(init: &DirectorField, cfg: &FlowConfig) -> Result<(DirectorField, SolveReport)> {
    let grid = init.grid().clone();
    cfg.validate(stable_tau_sphere(grid.h))?;
    let prob = Problem { grid: &grid, st: Stiffness::new(&grid) };
    let total = grid.node_count();
    let mut n = init.values().to_vec();
    let sign0 = sign_definite(&grid, &n);
    let mut trial = n.clone();
    let (mut g, mut pg) = (vec![[0.0; 3]; total], vec![[0.0; 3]; total]);
    prob.gradients(&n, &mut g, &mut pg);
    let mut residual = residual_norm(&grid, &prob.st, &pg);
    let mut mon = Monitor::new(cfg, prob.energy(&n), residual);
    let mut z = vec![[0.0; 3]; total];
    let mut d = vec![[0.0; 3]; total];
    let mut zg_old = 0.0;
    let mut pg_old = pg.clone();
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
                // n <- normalize(n + tau Delta_h n), Delta_h n = -g / m
                for &k in grid.interior() {
                    let f = -1.0 / prob.st.mass[k];
                    d[k] = [f * g[k][0], f * g[k][1], f * g[k][2]];
                }
                let fixed = matches!(cfg.policy, StepPolicy::Fixed { .. });
                let mut accepted = None;
                while tau >= 1e-12 {
                    prob.retract(&n, &d, tau, &mut trial)?;
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
                        std::mem::swap(&mut n, &mut trial);
                        mon.accept(et);
                    }
                    None => return Err(Error::StepUnderflow(tau)),
                }
            }
            StepPolicy::ConjugateGradient => {
                for &k in grid.interior() {
                    let f = 1.0 / prob.st.diag[k];
                    z[k] = [f * pg[k][0], f * pg[k][1], f * pg[k][2]];
                }
                let zg = interior_dot(&grid, &z, &pg);
                let beta = if zg_old > 0.0 {
                    let v: Vec<f64> = grid
                        .interior()
                        .iter()
                        .map(|&k| {
                            let y = [pg[k][0] - pg_old[k][0], pg[k][1] - pg_old[k][1], pg[k][2] - pg_old[k][2]];
                            dot(&z[k], &y)
                        })
                        .collect();
                    (crate::sum::pairwise(&v) / zg_old).max(0.0)
                } else {
                    0.0
                };
                let mut steepest = beta == 0.0;
                for &k in grid.interior() {
                    // carry the old direction into the new tangent plane
                    let c = dot(&d[k], &n[k]);
                    let old = [d[k][0] - c * n[k][0], d[k][1] - c * n[k][1], d[k][2] - c * n[k][2]];
                    d[k] = [beta * old[0] - z[k][0], beta * old[1] - z[k][1], beta * old[2] - z[k][2]];
                }
                let mut slope = interior_dot(&grid, &g, &d);
                if slope >= 0.0 {
                    for &k in grid.interior() {
                        d[k] = [-z[k][0], -z[k][1], -z[k][2]];
                    }
                    slope = -zg;
                    steepest = true;
                }
                let mut accepted = None;
                loop {
                    let dd: Vec<f64> = grid.interior().iter().map(|&k| dot(&d[k], &d[k]) * dot(&g[k], &n[k])).collect();
                    let kappa = 2.0 * dirichlet_energy(&grid, &d) - crate::sum::pairwise(&dd);
                    let mut t = if kappa > 0.0 { -slope / kappa } else { 1.0 };
                    for _ in 0..MAX_HALVINGS {
                        match prob.retract(&n, &d, t, &mut trial) {
                            Ok(()) => {
                                let et = prob.energy(&trial);
                                if et <= e + ARMIJO * t * slope {
                                    accepted = Some(et);
                                    break;
                                }
                            }
                            Err(Error::NormCollapse(_)) => {}
                            Err(err) => return Err(err),
                        }
                        t *= 0.5;
                        mon.rejected += 1;
                    }
                    if accepted.is_some() || steepest {
                        break;
                    }
                    for &k in grid.interior() {
                        d[k] = [-z[k][0], -z[k][1], -z[k][2]];
                    }
                    slope = -zg;
                    steepest = true;
                }
                match accepted {
                    Some(et) => {
                        std::mem::swap(&mut n, &mut trial);
                        mon.accept(et);
                    }
                    None => {
                        reason = "stalled";
                        break;
                    }
                }
                zg_old = zg;
                pg_old.copy_from_slice(&pg);
            }
        }
        prob.gradients(&n, &mut g, &mut pg);
        residual = residual_norm(&grid, &prob.st, &pg);
    }
    let sign1 = sign_definite(&grid, &n);
    let sd = sign0.map(|s| sign1 == Some(s));
    let maxg = max_forward_gradient(&grid, &n);
    let report = mon.finish(reason, residual, sd, maxg);
    Ok((DirectorField::new(grid.clone(), n)?, report))
}

/// The same flow on the unit c-field of the b^2 = 0 problem.
pub fn s4_harmonic_flow(init: &DirectorField, cfg: &FlowConfig) -> Result<(DirectorField, SolveReport)> {
    harmonic_map_flow(init, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::{conformal_field, EscapeConfig};
    use crate::energy::dirichlet_integral;
    use crate::grid::{make_grid, Domain};

    #[test]
    fn constant_data_is_a_fixed_point() {
        let g = make_grid(Domain::Disk, 24).unwrap();
        let n = DirectorField::from_fns(g, |_| [1.0, 0.0, 0.0], |_| [1.0, 0.0, 0.0]);
        let (m, rep) = harmonic_map_flow(&n, &FlowConfig::default()).unwrap();
        assert_eq!(rep.iterations, 0);
        assert_eq!(m.values(), n.values());
    }

    #[test]
    fn lifts_relax_to_the_conformal_energy_on_both_sides() {
        let g = make_grid(Domain::Disk, 32).unwrap();
        let conf = conformal_field(&EscapeConfig::radial(1, 0.0), &g).unwrap();
        let (n0, r0) = harmonic_map_flow(&conf, &FlowConfig::default()).unwrap();
        assert!(r0.converged && r0.max_increase <= 0.0);
        let e0 = dirichlet_integral(&n0);
        let ec = dirichlet_integral(&conf);
        assert!(e0 < ec && ec / e0 - 1.0 < 2e-2);
        let boundary = |x: [f64; 2]| [x[0], x[1], 0.0];
        for sign in [1.0, -1.0] {
            let init = vertical_lift(&g, boundary, sign);
            let (n, rep) = harmonic_map_flow(&init, &FlowConfig::default()).unwrap();
            assert!(rep.converged, "{rep:?}");
            assert!(rep.energy_history.windows(2).all(|w| w[1] <= w[0]));
            assert_eq!(rep.sign_definite, Some(true));
            assert!((dirichlet_integral(&n) / e0 - 1.0).abs() < 5e-3);
            for &k in g.band() {
                assert_eq!(n.get(k), init.get(k));
            }
            assert!(n.max_norm_defect() < 1e-14);
        }
    }

    #[test]
    fn explicit_policies_descend() {
        let g = make_grid(Domain::Disk, 16).unwrap();
        let init = vertical_lift(&g, |x| [x[0], x[1], 0.0], 1.0);
        let tau = stable_tau_sphere(g.h);
        for policy in [StepPolicy::Fixed { tau }, StepPolicy::Backtracking { tau: 4.0 * tau }] {
            let cfg = FlowConfig { max_iterations: 300, ..FlowConfig::with_policy(policy) };
            let (_, rep) = harmonic_map_flow(&init, &cfg).unwrap();
            assert!(rep.final_energy < rep.initial_energy);
            assert!(rep.max_increase <= 0.0, "{policy:?} {}", rep.max_increase);
        }
        let bad = FlowConfig::with_policy(StepPolicy::Fixed { tau: 2.0 * tau });
        assert!(harmonic_map_flow(&init, &bad).is_err());
    }
}
