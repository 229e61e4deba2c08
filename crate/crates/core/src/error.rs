use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("basis index {0} is outside 1..=5")]
    BasisIndex(usize),
    #[error("degenerate principal eigenvalue (gap {gap:.3e}){}", node_suffix(*.node))]
    DegenerateSpectrum { gap: f64, node: Option<usize> },
    #[error("reference vector is orthogonal to the principal eigenvector")]
    OrthogonalReference,
    #[error("rotation undefined for a director antipodal to e3 (1 + n.e3 = {0:.3e})")]
    AntipodalSingularity(f64),
    #[error("vector is not unit length (|n| = {0})")]
    NotUnit(f64),
    #[error("invalid material parameters: {0}")]
    InvalidParams(String),
    #[error("unsupported domain: {0}")]
    UnsupportedDomain(String),
    #[error("node {0} is not an interior node")]
    InactiveNode(usize),
    #[error("point ({0}, {1}) is not strictly inside the domain")]
    PointOnBoundary(f64, f64),
    #[error("linear solve failed to reach tolerance (relative residual {0:.3e})")]
    SolveFailed(f64),
    #[error("boundary samples too coarse: consecutive rotation {0:.3} rad")]
    UnderSampled(f64),
    #[error("invalid escape configuration: {0}")]
    InvalidEscape(String),
    #[error("B0 is singular (mu = 0); use the b^2 = 0 functionals")]
    SingularB0,
    #[error("b^2 = 0 functional called with b^2 = {0}")]
    WrongRegime(f64),
    #[error("field is not conformal (residual {residual:.3e} exceeds {threshold:.3e})")]
    NotConformal { residual: f64, threshold: f64 },
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("nodal norm collapsed to {0:.3e} before renormalization")]
    NormCollapse(f64),
    #[error("step size underflow (tau = {0:.3e})")]
    StepUnderflow(f64),
    #[error("bad fit: {0}")]
    BadFit(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("malformed field file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn node_suffix(node: Option<usize>) -> String {
    node.map(|k| format!(" at node {k}")).unwrap_or_default()
}
