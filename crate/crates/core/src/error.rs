use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("observation {index} lies outside the support")]
    OutOfSupport { index: usize },
    #[error("degenerate binning: {0}")]
    DegenerateBinning(String),
    #[error("unsupported significance level {0}")]
    UnsupportedLevel(f64),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
