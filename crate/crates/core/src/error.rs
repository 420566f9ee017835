use thiserror::Error;

/// Error type shared by every module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed or out-of-contract input supplied by a caller.
    #[error("input error: {0}")]
    Input(String),
    /// A mathematically undefined request, e.g. a divergent integral.
    #[error("domain error: {0}")]
    Domain(String),
    /// An invariant the code itself should guarantee was broken.
    #[error("internal error: {0}")]
    Internal(String),
    /// Invalid run configuration.
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn internal<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Internal(msg.into()))
}
