use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("{0}")]
    Domain(String),

    #[error("support of size {size} exceeds the exact solver cap of {cap}")]
    TooLarge { size: usize, cap: usize },

    #[error("non-finite coordinate at iteration {iteration}")]
    NonFinite { iteration: usize },

    #[error("step norm {norm} exceeds the cap {cap} at iteration {iteration}")]
    StepCap { iteration: usize, norm: f64, cap: f64 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Short machine-readable tag for this error.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dimension { .. } => "dimension_error",
            Error::Domain(_) => "domain_error",
            Error::TooLarge { .. } => "too_large",
            Error::NonFinite { .. } => "non_finite",
            Error::StepCap { .. } => "step_cap",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
