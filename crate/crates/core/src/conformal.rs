//! Conformal director fields built from escape points.
//!
//! A field is the stereographic image of w(x) = e^{i alpha} prod_j (x - a_j) / G_j(x),
//! where G_j = exp(g_j + i h_j) and g_j is the harmonic function with boundary
//! values log|x - a_j|. On the unit disk G_a(x) = 1 - conj(a) x.

use std::collections::VecDeque;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::grid::stencil::gradient_unchecked;
use crate::grid::{DirectorField, Domain, DomainGrid};
use crate::qtensor::{cross, dot, Vec3};
use crate::{Error, Result};

/// Boundary height c3 = -1/2: the planar uniaxial normalization of the c-field.
pub const KAPPA_PLANAR: f64 = 1.732_050_807_568_877_2;
/// The alternative normalization giving boundary c3 = -1/sqrt(3).
pub const KAPPA_ALT: f64 = 1.931_851_652_578_136_6;

/// Stereographic projection from the south pole; w = infinity maps to -e3.
pub fn stereographic(w: C64) -> Vec3 {
    if w.re.is_infinite() || w.im.is_infinite() {
        return [0.0, 0.0, -1.0];
    }
    homogeneous_to_sphere(w, C64::new(1.0, 0.0))
}

/// Inverse projection; returns an infinite value for n = -e3.
pub fn inverse_stereographic(n: &Vec3) -> C64 {
    let d = 1.0 + n[2];
    if d <= 0.0 {
        return C64::new(f64::INFINITY, 0.0);
    }
    C64::new(n[0] / d, n[1] / d)
}

// stereographic(num / den) without forming the quotient.
fn homogeneous_to_sphere(num: C64, den: C64) -> Vec3 {
    let (nn, dd) = (num.norm_sqr(), den.norm_sqr());
    let s = nn + dd;
    let p = num * den.conj();
    [2.0 * p.re / s, 2.0 * p.im / s, (dd - nn) / s]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    North,
    South,
}

/// Degree, escape points, phase and orientation of a conformal field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EscapeConfig {
    pub m: i32,
    pub points: Vec<[f64; 2]>,
    pub alpha: f64,
    pub orientation: Orientation,
}

impl EscapeConfig {
    pub fn new(m: i32, points: Vec<[f64; 2]>) -> Self {
        EscapeConfig { m, points, alpha: 0.0, orientation: Orientation::North }
    }

    /// m zeros at x = (r, 0) rotated evenly around the origin.
    pub fn radial(m: i32, r: f64) -> Self {
        let k = m.unsigned_abs() as usize;
        let pts = (0..k)
            .map(|j| {
                let t = std::f64::consts::TAU * j as f64 / k as f64;
                [r * t.cos(), r * t.sin()]
            })
            .collect();
        Self::new(m, pts)
    }

    pub fn validate(&self, domain: &Domain) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidEscape("degree m must be nonzero".into()));
        }
        if self.points.len() != self.m.unsigned_abs() as usize {
            return Err(Error::InvalidEscape(format!(
                "degree m = {} needs {} escape points, got {}",
                self.m,
                self.m.unsigned_abs(),
                self.points.len()
            )));
        }
        if !self.alpha.is_finite() {
            return Err(Error::InvalidEscape("phase alpha must be finite".into()));
        }
        check_points(&self.points, domain)
    }
}

fn check_points(points: &[[f64; 2]], domain: &Domain) -> Result<()> {
    for p in points {
        if !(p[0].is_finite() && p[1].is_finite()) || !domain.contains(*p) {
            return Err(Error::PointOnBoundary(p[0], p[1]));
        }
    }
    Ok(())
}

/// Holomorphic G_a with |G_a| = |x - a| on the boundary.
#[derive(Clone, Debug)]
pub enum GreenPair {
    Disk { a: C64 },
    Numeric(Arc<NumericGreen>),
}

/// Node samples of g_a and its harmonic conjugate h_a.
#[derive(Clone, Debug)]
pub struct NumericGreen {
    pub a: C64,
    grid: Arc<DomainGrid>,
    g: Vec<f64>,
    h: Vec<f64>,
}

pub fn disk_green_pair(a: [f64; 2]) -> Result<GreenPair> {
    if a[0].hypot(a[1]) >= 1.0 - 1e-6 || !a[0].is_finite() || !a[1].is_finite() {
        return Err(Error::PointOnBoundary(a[0], a[1]));
    }
    Ok(GreenPair::Disk { a: C64::new(a[0], a[1]) })
}

impl GreenPair {
    pub fn point(&self) -> C64 {
        match self {
            GreenPair::Disk { a } => *a,
            GreenPair::Numeric(n) => n.a,
        }
    }

    /// G_a(x) at an arbitrary point (bilinear interpolation for numeric pairs).
    pub fn eval(&self, x: C64) -> C64 {
        match self {
            GreenPair::Disk { a } => 1.0 - a.conj() * x,
            GreenPair::Numeric(n) => {
                let (g, h) = n.interpolate([x.re, x.im]);
                C64::from_polar(g.exp(), h)
            }
        }
    }

    /// G_a at grid node k.
    pub fn eval_node(&self, grid: &DomainGrid, k: usize) -> C64 {
        match self {
            GreenPair::Disk { .. } => {
                let p = grid.position(k);
                self.eval(C64::new(p[0], p[1]))
            }
            GreenPair::Numeric(n) => C64::from_polar(n.g[k].exp(), n.h[k]),
        }
    }

    /// G_a on the boundary, where |G_a| = |x - a| holds by construction.
    pub fn eval_boundary(&self, x: C64) -> C64 {
        match self {
            GreenPair::Disk { .. } => self.eval(x),
            GreenPair::Numeric(n) => {
                let (_, h) = n.interpolate([x.re, x.im]);
                C64::from_polar((x - n.a).norm(), h)
            }
        }
    }
}

impl NumericGreen {
    pub fn g(&self) -> &[f64] {
        &self.g
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    fn interpolate(&self, p: [f64; 2]) -> (f64, f64) {
        let grid = &self.grid;
        let o = grid.origin();
        let fx = ((p[0] - o[0]) / grid.h).clamp(0.0, (grid.nx - 2) as f64);
        let fy = ((p[1] - o[1]) / grid.h).clamp(0.0, (grid.ny - 2) as f64);
        let (i, j) = (fx.floor() as usize, fy.floor() as usize);
        let (tx, ty) = (fx - i as f64, fy - j as f64);
        let corners = [(i, j, (1.0 - tx) * (1.0 - ty)), (i + 1, j, tx * (1.0 - ty)), (i, j + 1, (1.0 - tx) * ty), (i + 1, j + 1, tx * ty)];
        let (mut g, mut h, mut wsum) = (0.0, 0.0, 0.0);
        for (ii, jj, w) in corners {
            let k = grid.index(ii, jj);
            if grid.is_active(k) && w > 0.0 {
                g += w * self.g[k];
                h += w * self.h[k];
                wsum += w;
            }
        }
        if wsum == 0.0 {
            let k = grid.nearest_node(p);
            return (self.g[k], self.h[k]);
        }
        (g / wsum, h / wsum)
    }
}

/// Solves the discrete Laplace problem for g_a and integrates its conjugate on
/// the dual lattice, anchored at the lowest-index interior node.
pub fn numeric_green_pair(grid: &Arc<DomainGrid>, a: [f64; 2]) -> Result<GreenPair> {
    if !grid.domain.contains(a) || grid.domain.boundary_distance(a) < 2.0 * grid.h {
        return Err(Error::PointOnBoundary(a[0], a[1]));
    }
    let ac = C64::new(a[0], a[1]);
    let total = grid.node_count();
    let mut g = vec![0.0; total];
    for &k in grid.band() {
        let b = grid.boundary_point(k);
        g[k] = (C64::new(b[0], b[1]) - ac).norm().ln();
    }
    solve_dirichlet_laplace(grid, &mut g)?;
    let h = harmonic_conjugate(grid, &g);
    Ok(GreenPair::Numeric(Arc::new(NumericGreen { a: ac, grid: grid.clone(), g, h })))
}

// Conjugate gradients on the 5-point Laplacian; band entries of `u` are data.
fn solve_dirichlet_laplace(grid: &DomainGrid, u: &mut [f64]) -> Result<()> {
    let interior = grid.interior();
    let apply = |x: &[f64], out: &mut [f64]| {
        for &k in interior {
            let nb: f64 = grid.neighbors(k).iter().map(|&m| if grid.is_interior(m) { x[m] } else { 0.0 }).sum();
            out[k] = 4.0 * x[k] - nb;
        }
    };
    let total = grid.node_count();
    let mut b = vec![0.0; total];
    for &k in interior {
        b[k] = grid.neighbors(k).iter().filter(|&&m| !grid.is_interior(m)).map(|&m| u[m]).sum();
    }
    let dotp = |x: &[f64], y: &[f64]| crate::sum::pairwise(&interior.iter().map(|&k| x[k] * y[k]).collect::<Vec<_>>());
    let mut x = vec![0.0; total];
    let mut r = b.clone();
    let mut p = r.clone();
    let mut ap = vec![0.0; total];
    let bnorm = dotp(&b, &b).sqrt().max(1e-300);
    let mut rr = dotp(&r, &r);
    let max_iter = 20 * (grid.nx + grid.ny) + 1000;
    for _ in 0..max_iter {
        if rr.sqrt() <= 1e-13 * bnorm {
            break;
        }
        apply(&p, &mut ap);
        let alpha = rr / dotp(&p, &ap);
        for &k in interior {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        let rr_new = dotp(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for &k in interior {
            p[k] = r[k] + beta * p[k];
        }
    }
    // true residual
    apply(&x, &mut ap);
    let res = interior.iter().map(|&k| (b[k] - ap[k]).powi(2)).sum::<f64>().sqrt() / bnorm;
    if res > 1e-8 {
        return Err(Error::SolveFailed(res));
    }
    for &k in interior {
        u[k] = x[k];
    }
    Ok(())
}

fn harmonic_conjugate(grid: &DomainGrid, g: &[f64]) -> Vec<f64> {
    let (nx, ny) = (grid.nx, grid.ny);
    // cell (i, j) spans nodes (i..=i+1, j..=j+1)
    let cell_ok = |i: usize, j: usize| {
        i + 1 < nx && j + 1 < ny && [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)].iter().all(|&(a, b)| grid.is_active(grid.index(a, b)))
    };
    let node = |i: usize, j: usize| g[grid.index(i, j)];
    let anchor = grid.interior()[0];
    let (ai, aj) = (anchor % nx, anchor / nx);
    let start = [(ai - 1, aj - 1), (ai, aj - 1), (ai - 1, aj), (ai, aj)]
        .into_iter()
        .find(|&(i, j)| cell_ok(i, j))
        .unwrap_or((ai, aj));
    let mut cell = vec![f64::NAN; nx * ny];
    let mut queue = VecDeque::new();
    cell[start.1 * nx + start.0] = 0.0;
    queue.push_back(start);
    while let Some((i, j)) = queue.pop_front() {
        let here = cell[j * nx + i];
        // (target cell, increment of h across the shared primal edge)
        let mut steps = Vec::with_capacity(4);
        if i + 1 < nx {
            steps.push(((i + 1, j), -(node(i + 1, j + 1) - node(i + 1, j))));
        }
        if i > 0 {
            steps.push(((i - 1, j), node(i, j + 1) - node(i, j)));
        }
        if j + 1 < ny {
            steps.push(((i, j + 1), node(i + 1, j + 1) - node(i, j + 1)));
        }
        if j > 0 {
            steps.push(((i, j - 1), -(node(i + 1, j) - node(i, j))));
        }
        for ((ti, tj), dh) in steps {
            if cell_ok(ti, tj) && cell[tj * nx + ti].is_nan() {
                cell[tj * nx + ti] = here + dh;
                queue.push_back((ti, tj));
            }
        }
    }
    let mut h = vec![0.0; nx * ny];
    let mut missing = Vec::new();
    for k in 0..nx * ny {
        if !grid.is_active(k) {
            continue;
        }
        let (i, j) = (k % nx, k / nx);
        let mut acc = (0.0, 0);
        for (ci, cj) in [(i.wrapping_sub(1), j.wrapping_sub(1)), (i, j.wrapping_sub(1)), (i.wrapping_sub(1), j), (i, j)] {
            if ci < nx && cj < ny && !cell[cj * nx + ci].is_nan() {
                acc = (acc.0 + cell[cj * nx + ci], acc.1 + 1);
            }
        }
        if acc.1 > 0 {
            h[k] = acc.0 / acc.1 as f64;
        } else {
            missing.push(k);
        }
    }
    for k in missing {
        let donor = grid.neighbors(k).into_iter().find(|&m| grid.is_interior(m));
        h[k] = donor.map(|m| h[m]).unwrap_or(0.0);
    }
    let shift = h[anchor];
    for v in h.iter_mut() {
        *v -= shift;
    }
    h
}

/// A rational map w = scale e^{i alpha} prod B_zero / prod B_pole with B_a = (x - a)/G_a,
/// optionally conjugated.
#[derive(Clone, Debug)]
pub struct ConformalMap {
    pub alpha: f64,
    pub scale: f64,
    pub conjugate: bool,
    pub orientation: Orientation,
    zeros: Vec<GreenPair>,
    poles: Vec<GreenPair>,
    grid: Arc<DomainGrid>,
}

fn green_pairs(grid: &Arc<DomainGrid>, points: &[[f64; 2]]) -> Result<Vec<GreenPair>> {
    let mut out: Vec<GreenPair> = Vec::with_capacity(points.len());
    for (j, p) in points.iter().enumerate() {
        if let Some(prev) = points[..j].iter().position(|q| q == p) {
            out.push(out[prev].clone());
            continue;
        }
        out.push(match grid.domain {
            Domain::Disk => disk_green_pair(*p)?,
            _ => numeric_green_pair(grid, *p)?,
        });
    }
    Ok(out)
}

impl ConformalMap {
    pub fn new(cfg: &EscapeConfig, grid: &Arc<DomainGrid>) -> Result<Self> {
        cfg.validate(&grid.domain)?;
        Ok(ConformalMap {
            alpha: cfg.alpha,
            scale: 1.0,
            conjugate: cfg.m < 0,
            orientation: cfg.orientation,
            zeros: green_pairs(grid, &cfg.points)?,
            poles: Vec::new(),
            grid: grid.clone(),
        })
    }

    /// Zeros at `b_points`, poles at `c_points`.
    pub fn mixed(b_points: &[[f64; 2]], c_points: &[[f64; 2]], alpha: f64, grid: &Arc<DomainGrid>) -> Result<Self> {
        check_points(b_points, &grid.domain)?;
        check_points(c_points, &grid.domain)?;
        Ok(ConformalMap {
            alpha,
            scale: 1.0,
            conjugate: false,
            orientation: Orientation::North,
            zeros: green_pairs(grid, b_points)?,
            poles: green_pairs(grid, c_points)?,
            grid: grid.clone(),
        })
    }

    /// The c-field map w = kappa conj(prod G/(x - a)) for k > 0, unconjugated for k < 0,
    /// so that the doubled planar angle winds k times.
    pub fn b0(k: i32, points: &[[f64; 2]], kappa: f64, grid: &Arc<DomainGrid>) -> Result<Self> {
        let cfg = EscapeConfig::new(k, points.to_vec());
        cfg.validate(&grid.domain)?;
        Ok(ConformalMap {
            alpha: 0.0,
            scale: kappa,
            conjugate: k > 0,
            orientation: Orientation::North,
            zeros: Vec::new(),
            poles: green_pairs(grid, points)?,
            grid: grid.clone(),
        })
    }

    fn homogeneous(&self, x: C64, eval: impl Fn(&GreenPair) -> C64) -> (C64, C64) {
        let mut num = C64::new(self.scale, 0.0);
        let mut den = C64::new(1.0, 0.0);
        for z in &self.zeros {
            num *= x - z.point();
            den *= eval(z);
        }
        for p in &self.poles {
            num *= eval(p);
            den *= x - p.point();
        }
        if self.conjugate {
            num = num.conj();
            den = den.conj();
        }
        (num * C64::from_polar(1.0, self.alpha), den)
    }

    fn orient(&self, n: Vec3) -> Vec3 {
        match self.orientation {
            Orientation::North => n,
            Orientation::South => [n[0], n[1], -n[2]],
        }
    }

    /// w at a point, as an extended complex number.
    pub fn w(&self, x: [f64; 2]) -> C64 {
        let xc = C64::new(x[0], x[1]);
        let (n, d) = self.homogeneous(xc, |g| g.eval(xc));
        if d.norm_sqr() == 0.0 {
            return C64::new(f64::INFINITY, 0.0);
        }
        n / d
    }

    pub fn director_at(&self, x: [f64; 2]) -> Vec3 {
        let xc = C64::new(x[0], x[1]);
        let (n, d) = self.homogeneous(xc, |g| g.eval(xc));
        self.orient(homogeneous_to_sphere(n, d))
    }

    /// Planar boundary director cos(phi) e1 + sin(phi) e2 with phi = arg w.
    pub fn boundary_director(&self, x: [f64; 2]) -> Vec3 {
        let xc = C64::new(x[0], x[1]);
        let (n, d) = self.homogeneous(xc, |g| g.eval_boundary(xc));
        let p = n * d.conj();
        let r = p.norm();
        if r == 0.0 {
            return [1.0, 0.0, 0.0];
        }
        [p.re / r, p.im / r, 0.0]
    }

    /// Dirichlet value on the boundary, where |w| equals `scale` identically.
    pub fn boundary_value(&self, x: [f64; 2]) -> Vec3 {
        let b = self.boundary_director(x);
        if self.scale == 1.0 {
            return b;
        }
        let k2 = self.scale * self.scale;
        let planar = 2.0 * self.scale / (1.0 + k2);
        self.orient([planar * b[0], planar * b[1], (1.0 - k2) / (1.0 + k2)])
    }

    /// Node samples: the map on interior nodes, boundary data on band nodes.
    pub fn field(&self) -> DirectorField {
        let grid = &self.grid;
        let mut values = vec![[0.0; 3]; grid.node_count()];
        for &k in grid.interior() {
            let p = grid.position(k);
            let xc = C64::new(p[0], p[1]);
            let (n, d) = self.homogeneous(xc, |g| g.eval_node(grid, k));
            values[k] = self.orient(homogeneous_to_sphere(n, d));
        }
        for &k in grid.band() {
            values[k] = self.boundary_value(grid.boundary_point(k));
        }
        DirectorField::from_raw(grid.clone(), values)
    }

    pub fn grid(&self) -> &Arc<DomainGrid> {
        &self.grid
    }
}

pub fn conformal_field(cfg: &EscapeConfig, grid: &Arc<DomainGrid>) -> Result<DirectorField> {
    Ok(ConformalMap::new(cfg, grid)?.field())
}

pub fn mixed_conformal_field(
    b_points: &[[f64; 2]],
    c_points: &[[f64; 2]],
    alpha: f64,
    grid: &Arc<DomainGrid>,
) -> Result<DirectorField> {
    Ok(ConformalMap::mixed(b_points, c_points, alpha, grid)?.field())
}

pub fn boundary_director(map: &ConformalMap, points: &[[f64; 2]]) -> Vec<Vec3> {
    points.iter().map(|p| map.boundary_director(*p)).collect()
}

/// c-field for the b^2 = 0 problem with boundary height (1 - kappa^2)/(1 + kappa^2).
pub fn b0_conformal_cfield(k: i32, points: &[[f64; 2]], kappa: f64, grid: &Arc<DomainGrid>) -> Result<DirectorField> {
    Ok(ConformalMap::b0(k, points, kappa, grid)?.field())
}

/// Winding number of planar directions sampled around a closed curve.
pub fn degree_of_boundary(vectors: &[Vec3]) -> Result<i32> {
    let n = vectors.len();
    if n < 3 {
        return Err(Error::UnderSampled(std::f64::consts::PI));
    }
    let mut total = 0.0;
    for k in 0..n {
        let (a, b) = (vectors[k], vectors[(k + 1) % n]);
        let step = (a[0] * b[1] - a[1] * b[0]).atan2(a[0] * b[0] + a[1] * b[1]);
        if step.abs() >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::UnderSampled(step.abs()));
        }
        total += step;
    }
    Ok((total / std::f64::consts::TAU).round() as i32)
}

/// Winding of the doubled angle: the degree of the line field n n^t.
pub fn line_field_degree(vectors: &[Vec3]) -> Result<i32> {
    let doubled: Vec<Vec3> = vectors
        .iter()
        .map(|v| {
            let r2 = v[0] * v[0] + v[1] * v[1];
            [(v[0] * v[0] - v[1] * v[1]) / r2, 2.0 * v[0] * v[1] / r2, 0.0]
        })
        .collect();
    degree_of_boundary(&doubled)
}

/// Integral of n . (d1 n x d2 n).
pub fn signed_area(n: &DirectorField) -> f64 {
    let grid = n.grid();
    let mut dens = vec![0.0; grid.node_count()];
    for &k in grid.interior() {
        let [dx, dy] = gradient_unchecked(grid, n.values(), k);
        dens[k] = dot(&n.get(k), &cross(&dx, &dy));
    }
    grid.integrate(&dens)
}

/// Orientation sign and max of |d2 n - sigma n x d1 n| over nodes at least
/// `margin` from the boundary.
pub fn conformality_residual(n: &DirectorField, margin: f64) -> (f64, f64) {
    let sigma = if signed_area(n) >= 0.0 { 1.0 } else { -1.0 };
    let grid = n.grid();
    let mut worst: f64 = 0.0;
    for k in grid.interior_beyond(margin) {
        let [dx, dy] = gradient_unchecked(grid, n.values(), k);
        let c = cross(&n.get(k), &dx);
        let r = [dy[0] - sigma * c[0], dy[1] - sigma * c[1], dy[2] - sigma * c[2]];
        worst = worst.max(dot(&r, &r).sqrt());
    }
    (sigma, worst)
}
