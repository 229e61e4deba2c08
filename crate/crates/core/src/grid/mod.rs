//! Masked Cartesian grids over planar domains, with cut-cell quadrature.

mod field;
pub mod io;
pub mod stencil;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::{sum, Error, Result};

pub use field::{DirectorField, QField};

/// The supported domains. All are centred at the origin; the square is [-1/2, 1/2]^2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Disk,
    Square,
    Ellipse { rx: f64, ry: f64 },
}

impl Domain {
    pub fn validate(&self) -> Result<()> {
        if let Domain::Ellipse { rx, ry } = *self {
            if !(rx.is_finite() && ry.is_finite() && rx > 0.0 && ry > 0.0) {
                return Err(Error::UnsupportedDomain(format!("ellipse semi-axes must be positive, got {rx}, {ry}")));
            }
        }
        Ok(())
    }

    /// Strict interior test.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        match *self {
            Domain::Disk => p[0] * p[0] + p[1] * p[1] < 1.0,
            Domain::Square => p[0].abs() < 0.5 && p[1].abs() < 0.5,
            Domain::Ellipse { rx, ry } => (p[0] / rx).powi(2) + (p[1] / ry).powi(2) < 1.0,
        }
    }

    pub fn half_extent(&self) -> [f64; 2] {
        match *self {
            Domain::Disk => [1.0, 1.0],
            Domain::Square => [0.5, 0.5],
            Domain::Ellipse { rx, ry } => [rx, ry],
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            Domain::Disk => std::f64::consts::PI,
            Domain::Square => 1.0,
            Domain::Ellipse { rx, ry } => std::f64::consts::PI * rx * ry,
        }
    }

    pub fn closest_boundary_point(&self, p: [f64; 2]) -> [f64; 2] {
        match *self {
            Domain::Disk => {
                let r = p[0].hypot(p[1]);
                if r == 0.0 {
                    [1.0, 0.0]
                } else {
                    [p[0] / r, p[1] / r]
                }
            }
            Domain::Square => {
                let (x, y) = (p[0], p[1]);
                if x.abs() <= 0.5 && y.abs() <= 0.5 {
                    // nearest side; ties go to the vertical sides
                    if 0.5 - x.abs() <= 0.5 - y.abs() {
                        [0.5f64.copysign(x), y]
                    } else {
                        [x, 0.5f64.copysign(y)]
                    }
                } else {
                    [x.clamp(-0.5, 0.5), y.clamp(-0.5, 0.5)]
                }
            }
            Domain::Ellipse { rx, ry } => ellipse_closest(rx, ry, p),
        }
    }

    pub fn boundary_distance(&self, p: [f64; 2]) -> f64 {
        let b = self.closest_boundary_point(p);
        (p[0] - b[0]).hypot(p[1] - b[1])
    }

    /// `count` boundary points in counter-clockwise order.
    pub fn boundary_samples(&self, count: usize) -> Vec<[f64; 2]> {
        (0..count)
            .map(|k| {
                let t = k as f64 / count as f64;
                let th = std::f64::consts::TAU * t;
                match *self {
                    Domain::Disk => [th.cos(), th.sin()],
                    Domain::Ellipse { rx, ry } => [rx * th.cos(), ry * th.sin()],
                    Domain::Square => {
                        // start at (1/2, 0), walk the perimeter of length 4
                        let s = (4.0 * t + 0.5) % 4.0;
                        let u = s.fract() - 0.5;
                        match s as usize {
                            0 => [0.5, u],
                            1 => [-u, 0.5],
                            2 => [-0.5, -u],
                            _ => [u, -0.5],
                        }
                    }
                }
            })
            .collect()
    }

    pub(crate) fn tag(&self) -> (u32, [f64; 4]) {
        match *self {
            Domain::Disk => (0, [1.0, 0.0, 0.0, 0.0]),
            Domain::Square => (1, [1.0, 0.0, 0.0, 0.0]),
            Domain::Ellipse { rx, ry } => (2, [rx, ry, 0.0, 0.0]),
        }
    }

    pub(crate) fn from_tag(tag: u32, params: [f64; 4]) -> Result<Domain> {
        match tag {
            0 => Ok(Domain::Disk),
            1 => Ok(Domain::Square),
            2 => Ok(Domain::Ellipse { rx: params[0], ry: params[1] }),
            t => Err(Error::UnsupportedDomain(format!("unknown domain tag {t}"))),
        }
    }
}

// Closest point on x^2/rx^2 + y^2/ry^2 = 1, solving for the Lagrange multiplier
// by bisection in the first quadrant.
fn ellipse_closest(rx: f64, ry: f64, p: [f64; 2]) -> [f64; 2] {
    if rx < ry {
        let q = ellipse_closest(ry, rx, [p[1], p[0]]);
        return [q[1], q[0]];
    }
    let (x0, y0) = (p[0].abs(), p[1].abs());
    let (x, y) = if y0 > 0.0 {
        if x0 > 0.0 {
            let g = |s: f64| (rx * x0 / (s + rx * rx)).powi(2) + (ry * y0 / (s + ry * ry)).powi(2) - 1.0;
            let mut lo = -ry * ry + ry * y0;
            let mut hi = -ry * ry + (rx * rx * x0 * x0 + ry * ry * y0 * y0).sqrt();
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if g(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let s = 0.5 * (lo + hi);
            (rx * rx * x0 / (s + rx * rx), ry * ry * y0 / (s + ry * ry))
        } else {
            (0.0, ry)
        }
    } else if rx > ry && x0 < (rx * rx - ry * ry) / rx {
        let x = rx * rx * x0 / (rx * rx - ry * ry);
        (x, ry * (1.0 - (x / rx).powi(2)).max(0.0).sqrt())
    } else {
        (rx, 0.0)
    };
    [x.copysign(p[0]), y.copysign(p[1])]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum NodeKind {
    Exterior = 0,
    Interior = 1,
    Band = 2,
}

/// Node (i, j) sits at ((i - ci) h, (j - cj) h) and has index j * nx + i.
#[derive(Clone, Debug)]
pub struct DomainGrid {
    pub domain: Domain,
    pub resolution: usize,
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    kind: Vec<NodeKind>,
    weight: Vec<f64>,
    interior: Vec<usize>,
    band: Vec<usize>,
    boundary_point: Vec<[f64; 2]>,
    boundary_dist: Vec<f64>,
}

pub fn make_grid(domain: Domain, resolution: usize) -> Result<Arc<DomainGrid>> {
    DomainGrid::new(domain, resolution).map(Arc::new)
}

impl DomainGrid {
    pub fn new(domain: Domain, resolution: usize) -> Result<Self> {
        domain.validate()?;
        if resolution < 16 {
            return Err(Error::UnsupportedDomain(format!("resolution {resolution} is below the minimum of 16")));
        }
        let h = 1.0 / resolution as f64;
        let ext = domain.half_extent();
        let half = |e: f64| (e / h - 1e-9).ceil() as usize + 2;
        let (hx, hy) = (half(ext[0]), half(ext[1]));
        let (nx, ny) = (2 * hx + 1, 2 * hy + 1);
        let total = nx * ny;
        let mut g = DomainGrid {
            domain,
            resolution,
            nx,
            ny,
            h,
            kind: vec![NodeKind::Exterior; total],
            weight: vec![0.0; total],
            interior: Vec::new(),
            band: Vec::new(),
            boundary_point: vec![[0.0; 2]; total],
            boundary_dist: vec![0.0; total],
        };
        for k in 0..total {
            let p = g.position(k);
            let b = domain.closest_boundary_point(p);
            g.boundary_point[k] = b;
            g.boundary_dist[k] = (p[0] - b[0]).hypot(p[1] - b[1]);
            if domain.contains(p) {
                g.kind[k] = NodeKind::Interior;
            }
        }
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                let k = j * nx + i;
                if g.kind[k] == NodeKind::Exterior && g.neighbors(k).iter().any(|&m| g.kind[m] == NodeKind::Interior) {
                    g.kind[k] = NodeKind::Band;
                }
            }
        }
        g.interior = (0..total).filter(|&k| g.kind[k] == NodeKind::Interior).collect();
        g.band = (0..total).filter(|&k| g.kind[k] == NodeKind::Band).collect();
        if g.interior.is_empty() {
            return Err(Error::UnsupportedDomain("no interior nodes at this resolution".into()));
        }
        g.compute_weights();
        Ok(g)
    }

    fn compute_weights(&mut self) {
        let (h, total) = (self.h, self.nx * self.ny);
        let mut raw = vec![0.0; total];
        for (k, w) in raw.iter_mut().enumerate() {
            let inside = self.kind[k] == NodeKind::Interior;
            if self.boundary_dist[k] > 0.75 * h {
                *w = if inside { h * h } else { 0.0 };
                continue;
            }
            // 4x4 subcells, each covered in proportion to its signed distance
            let p = self.position(k);
            let mut cover = 0.0;
            for a in 0..4 {
                for b in 0..4 {
                    let q = [p[0] + (a as f64 - 1.5) * h / 4.0, p[1] + (b as f64 - 1.5) * h / 4.0];
                    let d = self.domain.boundary_distance(q);
                    let sd = if self.domain.contains(q) { -d } else { d };
                    cover += (0.5 - sd / (h / 4.0)).clamp(0.0, 1.0);
                }
            }
            *w = h * h * cover / 16.0;
        }
        // Mass of non-interior nodes moves to the nearest interior nodes.
        let mut w = vec![0.0; total];
        for k in 0..total {
            if self.kind[k] == NodeKind::Interior {
                w[k] += raw[k];
                continue;
            }
            if raw[k] == 0.0 {
                continue;
            }
            let targets = self.transfer_targets(k);
            let share = raw[k] / targets.len().max(1) as f64;
            for m in targets {
                w[m] += share;
            }
        }
        self.weight = w;
    }

    // Interior 4-neighbours, else the interior part of the 3x3 block, else 5x5.
    fn transfer_targets(&self, k: usize) -> Vec<usize> {
        let direct: Vec<usize> = self.neighbors(k).into_iter().filter(|&m| self.is_interior(m)).collect();
        if !direct.is_empty() {
            return direct;
        }
        let (i, j) = ((k % self.nx) as i64, (k / self.nx) as i64);
        for reach in 1..=2i64 {
            let mut block = Vec::new();
            for jj in (j - reach).max(0)..=(j + reach).min(self.ny as i64 - 1) {
                for ii in (i - reach).max(0)..=(i + reach).min(self.nx as i64 - 1) {
                    let m = jj as usize * self.nx + ii as usize;
                    if self.is_interior(m) {
                        block.push(m);
                    }
                }
            }
            if !block.is_empty() {
                return block;
            }
        }
        Vec::new()
    }

    pub fn node_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn position(&self, k: usize) -> [f64; 2] {
        let (i, j) = (k % self.nx, k / self.nx);
        let ci = ((self.nx - 1) / 2) as f64;
        let cj = ((self.ny - 1) / 2) as f64;
        [(i as f64 - ci) * self.h, (j as f64 - cj) * self.h]
    }

    pub fn origin(&self) -> [f64; 2] {
        self.position(0)
    }

    /// Node nearest to a point.
    pub fn nearest_node(&self, p: [f64; 2]) -> usize {
        let ci = ((self.nx - 1) / 2) as f64;
        let cj = ((self.ny - 1) / 2) as f64;
        let i = (p[0] / self.h + ci).round().clamp(0.0, (self.nx - 1) as f64) as usize;
        let j = (p[1] / self.h + cj).round().clamp(0.0, (self.ny - 1) as f64) as usize;
        self.index(i, j)
    }

    /// East, west, north, south.
    #[inline]
    pub fn neighbors(&self, k: usize) -> [usize; 4] {
        [k + 1, k - 1, k + self.nx, k - self.nx]
    }

    pub fn kind(&self, k: usize) -> NodeKind {
        self.kind[k]
    }

    pub fn kinds(&self) -> &[NodeKind] {
        &self.kind
    }

    pub fn is_interior(&self, k: usize) -> bool {
        self.kind[k] == NodeKind::Interior
    }

    pub fn is_active(&self, k: usize) -> bool {
        self.kind[k] != NodeKind::Exterior
    }

    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn band(&self) -> &[usize] {
        &self.band
    }

    pub fn weights(&self) -> &[f64] {
        &self.weight
    }

    /// Nearest boundary point of a node; the Dirichlet sampling point for band nodes.
    pub fn boundary_point(&self, k: usize) -> [f64; 2] {
        self.boundary_point[k]
    }

    pub fn boundary_distance(&self, k: usize) -> f64 {
        self.boundary_dist[k]
    }

    /// Interior nodes at distance at least `margin` from the boundary.
    pub fn interior_beyond(&self, margin: f64) -> Vec<usize> {
        self.interior.iter().copied().filter(|&k| self.boundary_dist[k] >= margin).collect()
    }

    /// Quadrature of a per-node density over the interior nodes.
    pub fn integrate(&self, density: &[f64]) -> f64 {
        self.integrate_over(&self.interior, density)
    }

    /// Quadrature restricted to a subset of interior nodes.
    pub fn integrate_over(&self, nodes: &[usize], density: &[f64]) -> f64 {
        let terms: Vec<f64> = nodes.iter().map(|&k| self.weight[k] * density[k]).collect();
        sum::pairwise(&terms)
    }

    pub fn weight_sum(&self) -> f64 {
        let terms: Vec<f64> = self.interior.iter().map(|&k| self.weight[k]).collect();
        sum::pairwise(&terms)
    }

    pub fn same_layout(&self, other: &DomainGrid) -> bool {
        self.domain == other.domain && self.resolution == other.resolution
    }
}
