use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Caller violated an operation's precondition.
    #[error("usage error: {0}")]
    Usage(String),
    /// Malformed input text.
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    /// Well-formed input that violates a structural invariant.
    #[error("validation error: {0}")]
    Validation(String),
    /// A bounded internal loop ran out of budget.
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
