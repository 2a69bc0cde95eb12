use thiserror::Error;

use crate::words::Word;

/// Errors raised by the library.
///
/// Variants split into two families: input validation (bad symbols, shapes,
/// out-of-domain points) and numerical failure (singular solves, size caps).
/// The CLI maps the first family to exit code 2 and the second to 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid symbol coefficient at word {word}: {reason}")]
    InvalidSymbol { word: Word, reason: String },

    #[error("invalid input in `{field}`: {reason}")]
    InvalidInput { field: String, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("point lies outside the required domain: {0}")]
    OutsideDomain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("basis size {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("series diverges: {0}")]
    Divergence(String),
}

impl Error {
    pub(crate) fn input(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidInput { field: field.into(), reason: reason.into() }
    }

    /// True for errors caused by malformed or out-of-contract inputs.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidSymbol { .. }
                | Error::InvalidInput { .. }
                | Error::DimensionMismatch(_)
                | Error::OutsideDomain(_)
                | Error::Precondition(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
