use thiserror::Error;

/// Errors raised by the library.
///
/// The variants map onto the CLI exit-code contract: domain, capacity,
/// syntax and unsupported errors are caller mistakes, numeric errors
/// signal a breakdown of floating-point computation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("capacity error: {needed} recurrence coefficients needed, {available} available")]
    Capacity { needed: usize, available: usize },

    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
