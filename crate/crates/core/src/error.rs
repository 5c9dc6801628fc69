use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("ell and p must differ (both are {0})")]
    EllEqualsP(u64),
    #[error("resource limit exceeded: {0}")]
    Budget(String),
    #[error("arithmetic overflow in {0}")]
    Overflow(String),
    #[error("cross-check failed: {0}")]
    CrossCheck(String),
    #[error("truncation too small: {0}")]
    Truncation(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn cross(msg: impl Into<String>) -> Self {
        Error::CrossCheck(msg.into())
    }

    /// True for errors that signal an internal inconsistency rather than bad input.
    pub fn is_cross_check(&self) -> bool {
        matches!(self, Error::CrossCheck(_) | Error::Overflow(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
