use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An argument fell outside the domain of a kernel, process or cocycle.
    #[error("{variant}: argument {point} is outside the domain ({reason})")]
    Domain {
        variant: String,
        point: String,
        reason: String,
    },

    #[error("tabulated lookup miss at t = {0} (no interpolation)")]
    TabulatedLookup(f64),

    #[error("zero variance at t = {0}; cannot normalize")]
    ZeroVariance(f64),

    #[error("matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:e}")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("not reflection positive: min eigenvalue of the reflected Gram matrix is {min_eigenvalue:e}")]
    NotReflectionPositive { min_eigenvalue: f64 },

    #[error("shift does not descend to quotient: inconsistency {residual:e} exceeds {tolerance:e}")]
    ShiftDoesNotDescend { residual: f64, tolerance: f64 },

    #[error("Cholesky factorization failed after jitter up to {max_jitter:e}: min eigenvalue {min_eigenvalue:e}")]
    JitterExhausted { max_jitter: f64, min_eigenvalue: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(variant: &str, point: impl std::fmt::Display, reason: &str) -> Self {
        Error::Domain {
            variant: variant.to_string(),
            point: point.to_string(),
            reason: reason.to_string(),
        }
    }

    /// True for errors caused by the caller's input rather than a numerical
    /// or mathematical failure.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidGrid(_)
                | Error::InvalidParameter(_)
                | Error::Domain { .. }
                | Error::TabulatedLookup(_)
                | Error::ZeroVariance(_)
                | Error::Parse(_)
                | Error::Io(_)
                | Error::Csv(_)
                | Error::Json(_)
        )
    }
}
