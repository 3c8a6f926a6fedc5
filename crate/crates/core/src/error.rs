use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("points live on different manifolds ({0} vs {1})")]
    ManifoldMismatch(String, String),

    #[error("tangent vectors are anchored at different base points")]
    BaseMismatch,

    #[error("matrix is not symmetric (asymmetry {0:.3e})")]
    NotSymmetric(f64),

    #[error("matrix is not diagonal")]
    NotDiagonal,

    #[error("point outside the manifold domain: {0}")]
    OutsideDomain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("iteration did not converge after {iterations} steps (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("step size {eta:.6e} exceeds the admissible maximum {max:.6e}")]
    StepSizeTooLarge { eta: f64, max: f64 },

    #[error("incompatible configuration: {0}")]
    Incompatible(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
