//! Landau-de Gennes Q-tensor fields on planar domains.
//!
//! Conformal director fields, the first-order energy corrections around them,
//! and the minimizers of the full Q-tensor energy used to check those
//! corrections numerically.

pub mod asymptotics;
pub mod conformal;
pub mod energy;
mod error;
pub mod grid;
pub mod qtensor;
pub mod render;
pub mod solvers;
mod sum;

pub use error::{Error, Result};
pub use grid::{Domain, DomainGrid, DirectorField, QField, NodeKind};
pub use qtensor::{MaterialParams, QVec, Vec3, Mat3};
