use std::sync::Arc;

use super::{DomainGrid, NodeKind};
use crate::qtensor::{self, QVec, Vec3};
use crate::{Error, Result};

/// Unit vector field on the active nodes of a grid. Exterior nodes hold zero.
#[derive(Clone, Debug)]
pub struct DirectorField {
    grid: Arc<DomainGrid>,
    values: Vec<Vec3>,
}

impl DirectorField {
    /// Checks |n| = 1 on active nodes and zeroes the exterior.
    pub fn new(grid: Arc<DomainGrid>, mut values: Vec<Vec3>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::GridMismatch(format!("{} values for {} nodes", values.len(), grid.node_count())));
        }
        for (k, v) in values.iter_mut().enumerate() {
            if grid.kind(k) == NodeKind::Exterior {
                *v = [0.0; 3];
            } else {
                let len = qtensor::norm(v);
                if (len - 1.0).abs() > 1e-10 {
                    return Err(Error::NotUnit(len));
                }
            }
        }
        Ok(DirectorField { grid, values })
    }

    /// Interior nodes from `interior(x)`, band nodes from `boundary(x_b)` at their
    /// boundary points. Both results are normalized.
    pub fn from_fns(
        grid: Arc<DomainGrid>,
        interior: impl Fn([f64; 2]) -> Vec3,
        boundary: impl Fn([f64; 2]) -> Vec3,
    ) -> Self {
        let mut values = vec![[0.0; 3]; grid.node_count()];
        for &k in grid.interior() {
            values[k] = qtensor::normalize(&interior(grid.position(k)));
        }
        for &k in grid.band() {
            values[k] = qtensor::normalize(&boundary(grid.boundary_point(k)));
        }
        DirectorField { grid, values }
    }

    pub(crate) fn from_raw(grid: Arc<DomainGrid>, values: Vec<Vec3>) -> Self {
        DirectorField { grid, values }
    }

    pub fn grid(&self) -> &Arc<DomainGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Vec3] {
        &self.values
    }

    pub fn get(&self, k: usize) -> Vec3 {
        self.values[k]
    }

    /// Value at the node nearest to `p`.
    pub fn at(&self, p: [f64; 2]) -> Vec3 {
        self.values[self.grid.nearest_node(p)]
    }

    /// n -> (n1, n2, -n3).
    pub fn reflected(&self) -> Self {
        let values = self.values.iter().map(|v| [v[0], v[1], -v[2]]).collect();
        DirectorField { grid: self.grid.clone(), values }
    }

    /// Same field with the interior replaced; band values are kept.
    pub fn with_interior(&self, f: impl Fn(usize, [f64; 2]) -> Vec3) -> Self {
        let mut out = self.clone();
        for &k in self.grid.interior() {
            out.values[k] = qtensor::normalize(&f(k, self.grid.position(k)));
        }
        out
    }

    /// s (n n - I/3) nodewise.
    pub fn uniaxial(&self, s: f64) -> QField {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, n)| if self.grid.is_active(k) { qtensor::uniaxial(n, s) } else { QVec::ZERO })
            .collect();
        QField { grid: self.grid.clone(), values }
    }

    pub fn max_norm_defect(&self) -> f64 {
        (0..self.values.len())
            .filter(|&k| self.grid.is_active(k))
            .map(|k| (qtensor::norm(&self.values[k]) - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Q-tensor field in F-coordinates. Band values are the Dirichlet data.
#[derive(Clone, Debug)]
pub struct QField {
    grid: Arc<DomainGrid>,
    values: Vec<QVec>,
}

impl QField {
    pub fn new(grid: Arc<DomainGrid>, mut values: Vec<QVec>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::GridMismatch(format!("{} values for {} nodes", values.len(), grid.node_count())));
        }
        for (k, v) in values.iter_mut().enumerate() {
            if grid.kind(k) == NodeKind::Exterior {
                *v = QVec::ZERO;
            }
        }
        Ok(QField { grid, values })
    }

    pub fn grid(&self) -> &Arc<DomainGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[QVec] {
        &self.values
    }

    pub fn get(&self, k: usize) -> QVec {
        self.values[k]
    }

    /// Same field with the interior replaced; band values are kept.
    pub fn with_interior(&self, f: impl Fn(usize, [f64; 2]) -> QVec) -> Self {
        let mut out = self.clone();
        for &k in self.grid.interior() {
            out.values[k] = f(k, self.grid.position(k));
        }
        out
    }

    pub fn boundary_equals(&self, other: &QField) -> bool {
        self.grid.band().iter().all(|&k| self.values[k] == other.values[k])
    }
}
