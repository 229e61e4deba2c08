//! Five-point finite differences on masked grids.

use super::DomainGrid;
use crate::qtensor::{QVec, Vec3};
use crate::{Error, Result};

/// Values that can be differenced: reals, 3-vectors and Q-tensors.
pub trait NodeValue: Copy + Default {
    /// a x + b y
    fn combine(a: f64, x: &Self, b: f64, y: &Self) -> Self;
    fn norm_sq(&self) -> f64;
    fn dot(&self, other: &Self) -> f64;
}

impl NodeValue for f64 {
    fn combine(a: f64, x: &f64, b: f64, y: &f64) -> f64 {
        a * x + b * y
    }
    fn norm_sq(&self) -> f64 {
        self * self
    }
    fn dot(&self, other: &f64) -> f64 {
        self * other
    }
}

impl NodeValue for Vec3 {
    fn combine(a: f64, x: &Vec3, b: f64, y: &Vec3) -> Vec3 {
        [a * x[0] + b * y[0], a * x[1] + b * y[1], a * x[2] + b * y[2]]
    }
    fn norm_sq(&self) -> f64 {
        self[0] * self[0] + self[1] * self[1] + self[2] * self[2]
    }
    fn dot(&self, other: &Vec3) -> f64 {
        self[0] * other[0] + self[1] * other[1] + self[2] * other[2]
    }
}

impl NodeValue for QVec {
    fn combine(a: f64, x: &QVec, b: f64, y: &QVec) -> QVec {
        let mut out = [0.0; 5];
        for (o, (p, q)) in out.iter_mut().zip(x.0.iter().zip(&y.0)) {
            *o = a * p + b * q;
        }
        QVec(out)
    }
    fn norm_sq(&self) -> f64 {
        QVec::norm_sq(self)
    }
    fn dot(&self, other: &QVec) -> f64 {
        QVec::dot(self, other)
    }
}

fn check(grid: &DomainGrid, node: usize) -> Result<()> {
    if node >= grid.node_count() || !grid.is_interior(node) {
        return Err(Error::InactiveNode(node));
    }
    Ok(())
}

/// Central differences (d/dx, d/dy).
pub fn gradient<T: NodeValue>(grid: &DomainGrid, values: &[T], node: usize) -> Result<[T; 2]> {
    check(grid, node)?;
    Ok(gradient_unchecked(grid, values, node))
}

#[inline]
pub(crate) fn gradient_unchecked<T: NodeValue>(grid: &DomainGrid, values: &[T], k: usize) -> [T; 2] {
    let [e, w, n, s] = grid.neighbors(k);
    let c = 0.5 / grid.h;
    [T::combine(c, &values[e], -c, &values[w]), T::combine(c, &values[n], -c, &values[s])]
}

pub fn laplacian<T: NodeValue>(grid: &DomainGrid, values: &[T], node: usize) -> Result<T> {
    check(grid, node)?;
    Ok(laplacian_unchecked(grid, values, node))
}

#[inline]
pub(crate) fn laplacian_unchecked<T: NodeValue>(grid: &DomainGrid, values: &[T], k: usize) -> T {
    let [e, w, n, s] = grid.neighbors(k);
    let ew = T::combine(1.0, &values[e], 1.0, &values[w]);
    let ns = T::combine(1.0, &values[n], 1.0, &values[s]);
    let sum = T::combine(1.0, &ew, 1.0, &ns);
    let ih2 = 1.0 / (grid.h * grid.h);
    T::combine(ih2, &sum, -4.0 * ih2, &values[k])
}

/// Edge-based gradient density (1/2h^2) sum_j |u_j - u_k|^2, the integrand
/// of the discrete Dirichlet energy.
#[inline]
pub fn dirichlet_density<T: NodeValue>(grid: &DomainGrid, values: &[T], k: usize) -> f64 {
    let c = &values[k];
    let s: f64 = grid.neighbors(k).iter().map(|&m| T::combine(1.0, &values[m], -1.0, c).norm_sq()).sum();
    0.5 * s / (grid.h * grid.h)
}

/// Dirichlet density at every node (zero off the interior).
pub fn dirichlet_densities<T: NodeValue>(grid: &DomainGrid, values: &[T]) -> Vec<f64> {
    let mut out = vec![0.0; grid.node_count()];
    for &k in grid.interior() {
        out[k] = dirichlet_density(grid, values, k);
    }
    out
}

/// (1/2h^2) sum_j (u_j - u_k)(u_j - u_k)^t: the edge form of sum_i d_i u (x) d_i u.
#[inline]
pub fn gradient_tensor(grid: &DomainGrid, values: &[Vec3], k: usize) -> [[f64; 3]; 3] {
    let c = values[k];
    let mut m = [[0.0; 3]; 3];
    let f = 0.5 / (grid.h * grid.h);
    for &j in &grid.neighbors(k) {
        let d = [values[j][0] - c[0], values[j][1] - c[1], values[j][2] - c[2]];
        for a in 0..3 {
            for b in 0..3 {
                m[a][b] += f * d[a] * d[b];
            }
        }
    }
    m
}

/// Integral of (1/2) |grad u|^2 with the edge density.
pub fn dirichlet_energy<T: NodeValue>(grid: &DomainGrid, values: &[T]) -> f64 {
    0.5 * grid.integrate(&dirichlet_densities(grid, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Domain;

    fn scalar(grid: &DomainGrid, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        (0..grid.node_count()).map(|k| f(grid.position(k))).collect()
    }

    #[test]
    fn exact_on_low_degree_polynomials() {
        let g = DomainGrid::new(Domain::Disk, 32).unwrap();
        let fx = scalar(&g, |p| p[0]);
        let fq = scalar(&g, |p| p[0] * p[0]);
        for &k in g.interior().iter().step_by(17) {
            let gr = gradient(&g, &fx, k).unwrap();
            assert!((gr[0] - 1.0).abs() < 1e-12 && gr[1].abs() < 1e-12);
            assert!((laplacian(&g, &fq, k).unwrap() - 2.0).abs() < 1e-9);
        }
        let outside = (0..g.node_count()).find(|&k| !g.is_interior(k)).unwrap();
        assert!(matches!(gradient(&g, &fx, outside), Err(Error::InactiveNode(_))));
        assert!(matches!(laplacian(&g, &fx, outside), Err(Error::InactiveNode(_))));
    }

    #[test]
    fn laplacian_is_second_order() {
        let err = |res: usize| {
            let g = DomainGrid::new(Domain::Square, res).unwrap();
            let f = scalar(&g, |p| p[0].sin() * p[1].sin());
            g.interior()
                .iter()
                .map(|&k| (laplacian(&g, &f, k).unwrap() + 2.0 * f[k]).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(32) / err(64);
        assert!((ratio - 4.0).abs() < 0.4, "ratio {ratio}");
    }

    #[test]
    fn integration_by_parts_defect_is_small() {
        // f vanishes on the band, g is a polynomial
        let defect = |res: usize| {
            let g = DomainGrid::new(Domain::Disk, res).unwrap();
            let f = scalar(&g, |p| (1.0 - p[0] * p[0] - p[1] * p[1]).max(0.0).powi(2));
            let q = scalar(&g, |p| p[0] * p[0] + p[0] * p[1] + p[0].exp());
            let mut lap = vec![0.0; g.node_count()];
            let mut dot = vec![0.0; g.node_count()];
            for &k in g.interior() {
                lap[k] = f[k] * laplacian(&g, &q, k).unwrap();
                let a = gradient(&g, &f, k).unwrap();
                let b = gradient(&g, &q, k).unwrap();
                dot[k] = a[0] * b[0] + a[1] * b[1];
            }
            (g.integrate(&lap) + g.integrate(&dot)).abs()
        };
        let (d1, d2) = (defect(32), defect(64));
        assert!(d1 < 1e-3 && d2 < 1e-3, "{d1} {d2}");
    }

    #[test]
    fn energy_of_smooth_field_converges() {
        // exact: (1/2) int_disk |grad (x^2 + y)|^2 = (1/2)(pi + pi) since int 4x^2 = pi
        let exact = std::f64::consts::PI;
        let err = |res: usize| {
            let g = DomainGrid::new(Domain::Disk, res).unwrap();
            let f = scalar(&g, |p| p[0] * p[0] + p[1]);
            (dirichlet_energy(&g, &f) - exact).abs()
        };
        let (e1, e2, e3) = (err(32), err(64), err(128));
        let order = ((e1 / e3).ln() / 4f64.ln()).max((e1 / e2).ln() / 2f64.ln());
        println!("errors {e1} {e2} {e3} order {order}");
        assert!(order >= 1.5, "errors {e1} {e2} {e3}");
    }
}
