use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error(
        "quadrature did not reach tolerance {tol:e} after {levels} refinement levels (last change {last_change:e})"
    )]
    Quadrature { tol: f64, levels: usize, last_change: f64 },

    #[error("linear solve failed: relative residual {residual:e} (pivot ratio {pivot_ratio:e}, n = {size})")]
    Solve { residual: f64, pivot_ratio: f64, size: usize },

    #[error("green table does not cover displacement {0:?}")]
    GreenCoverage(Vec<i32>),

    #[error("geometry violation: {0}")]
    Geometry(String),

    #[error("guard violation: {0}")]
    Guard(String),

    #[error("window mismatch: {0}")]
    WindowMismatch(String),

    #[error("internal consistency failure: {0}")]
    Consistency(String),

    #[error("backward-side rejection budget of {budget} exhausted at start {start:?}")]
    RejectionBudget { budget: usize, start: Vec<i32> },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::Format(_) | Error::Io(_) | Error::Json(_) => 1,
            Error::Quadrature { .. } | Error::Solve { .. } | Error::Consistency(_) | Error::RejectionBudget { .. } => 2,
            Error::DimensionMismatch { .. }
            | Error::GreenCoverage(_)
            | Error::Geometry(_)
            | Error::Guard(_)
            | Error::WindowMismatch(_) => 3,
        }
    }
}
