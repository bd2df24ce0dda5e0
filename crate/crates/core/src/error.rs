use thiserror::Error;

pub type Result<T> = std::result::Result<T, AleError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AleError {
    #[error("operator {order} needs at least {min} nodes, got {got}")]
    TooFewNodes {
        order: String,
        min: usize,
        got: usize,
    },

    #[error("grid spacing must be positive, got {0}")]
    NonPositiveSpacing(f64),

    #[error("blocks do not meet at the interface: left ends at {left_end}, right starts at {right_start}")]
    InterfaceMismatch { left_end: f64, right_start: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degenerate mesh at t = {t}: node {node} has jacobian value {value:e}")]
    DegenerateMesh { t: f64, node: usize, value: f64 },

    #[error("node ordering violated at t = {t} between nodes {node} and {}", node + 1)]
    NodeOrdering { t: f64, node: usize },

    #[error("left boundary velocity {0} exceeds 1; the inflow boundary would turn into an outflow boundary")]
    OutflowAtInflowBoundary(f64),

    #[error("matrix is not symmetric: max asymmetry {asymmetry:e} (scale {scale:e})")]
    NotSymmetric { asymmetry: f64, scale: f64 },

    #[error("jacobi iteration did not converge after {sweeps} sweeps (off-diagonal {off:e})")]
    EigenNoConvergence { sweeps: usize, off: f64 },

    #[error("invalid butcher tableau: {0}")]
    InvalidTableau(String),

    #[error("invalid filter: {0}")]
    InvalidFilter(String),

    #[error("non-finite solution value at t = {t}")]
    NonFinite { t: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for AleError {
    fn from(e: std::io::Error) -> Self {
        AleError::Io(e.to_string())
    }
}
