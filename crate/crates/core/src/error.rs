use thiserror::Error;

/// Errors produced across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numeric failure after {iterations} iterations: {message}")]
    NumericFailure { message: String, iterations: usize },

    #[error("invalid layout: {message}")]
    InvalidLayout {
        message: String,
        /// Offending pair of child indices (0-based), when the failure involves two children.
        pair: Option<(usize, usize)>,
    },

    #[error("planning failed on segment {segment} after {tries} tries")]
    PlanningFailure { segment: usize, tries: u64 },

    #[error("target unreachable in the discretization")]
    Unreachable,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// Short machine-readable tag, used in structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::InvalidInput(_) => "invalid-input",
            Error::NumericFailure { .. } => "numeric-failure",
            Error::InvalidLayout { .. } => "invalid-layout",
            Error::PlanningFailure { .. } => "planning-failure",
            Error::Unreachable => "unreachable",
            Error::InsufficientData(_) => "insufficient-data",
            Error::Internal(_) => "internal",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
