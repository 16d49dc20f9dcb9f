use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Malformed PGM header or sample token.
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    /// `unit` names what was counted, e.g. "bytes" or "samples".
    #[error("truncated input: expected {expected} {unit}, got {actual}")]
    Truncated {
        expected: usize,
        actual: usize,
        unit: &'static str,
    },

    #[error("unsupported format: {0}")]
    Format(String),

    #[error("corrupt stream: {0}")]
    Corrupt(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
