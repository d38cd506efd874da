use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration or size limit was violated by the caller.
    #[error("usage error: {0}")]
    Usage(String),

    /// Input data is malformed (empty, non-finite, wrong length).
    #[error("data error: {0}")]
    Data(String),

    /// A floating point range limit would be exceeded.
    #[error("range error: {0}")]
    Range(String),

    /// A numerical algorithm failed (e.g. covariance factorization).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The denominator of the estimator vanished: the path is identically zero up to `index`.
    #[error("degenerate path: integrated square vanishes at grid index {index}")]
    DegeneratePath { index: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

pub(crate) fn data(msg: impl Into<String>) -> Error {
    Error::Data(msg.into())
}
