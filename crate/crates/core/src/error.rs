use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("coefficient {value} at element {index} is below the floor {floor}")]
    CoefficientBelowFloor {
        index: usize,
        value: f64,
        floor: f64,
    },

    #[error("system matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("rate fit failed: {0}")]
    RateFit(String),

    #[error("prox evaluation failed: {0}")]
    Prox(String),

    #[error("iteration diverged at step {iteration} (error {value:e})")]
    Diverged { iteration: usize, value: f64 },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Short machine-readable category, used on diagnostic streams.
    pub fn category(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension",
            Error::InvalidParameter { .. } => "config",
            Error::CoefficientBelowFloor { .. } => "coefficient",
            Error::NotPositiveDefinite { .. } => "factorization",
            Error::RateFit(_) => "rate-fit",
            Error::Prox(_) => "prox",
            Error::Diverged { .. } => "divergence",
        }
    }
}

pub(crate) fn check_dim(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what,
            expected,
            got,
        })
    }
}
