use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} exceeds the feasibility guard ({limit}); raise the guard explicitly to proceed")]
    GuardExceeded { what: &'static str, limit: String },

    /// A result needed a complete factorisation that the effort budget did not produce.
    #[error("incomplete factorization: {0}")]
    Incomplete(String),

    /// An exact computation produced a non-zero remainder or a broken identity.
    #[error("exactness violated: {0}")]
    Inexact(String),

    #[error("integer overflow in {0}")]
    Overflow(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
