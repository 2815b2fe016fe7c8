use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The shifted energy must stay strictly positive; usually means `c0` is too small.
    #[error("shifted energy {energy} is not positive (increase c0)")]
    NonPositiveEnergy { energy: f64 },

    #[error("invalid scheme state: {0}")]
    InvalidState(String),

    /// A step produced a non-finite value or exceeded the overflow guard.
    #[error("solution diverged at step {step}: max |phi| = {max_abs}")]
    Diverged { step: usize, max_abs: f64 },

    #[error("grid {nx}x{ny} is too coarse (need at least 8 points per direction)")]
    GridTooCoarse { nx: usize, ny: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid value for `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(field: &str, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
