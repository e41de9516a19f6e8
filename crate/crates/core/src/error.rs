use thiserror::Error;

/// Errors produced across the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    Dimension {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("insufficient data: need at least {needed} symbols, have {available}")]
    InsufficientData { needed: usize, available: usize },

    #[error("no return to the target set within horizon {horizon}")]
    ReturnTimeOverflow { horizon: u64 },

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("precondition refused: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dimension(context: &'static str, expected: usize, found: usize) -> Error {
    Error::Dimension {
        context,
        expected,
        found,
    }
}
