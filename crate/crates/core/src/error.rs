//! Crate-wide error type and result alias.

use thiserror::Error;

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes of the solver, learner, and simulation layers.
#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument violated a documented precondition
    /// (e.g. a negative power or a time fraction outside [0, 1]).
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value failed validation. `key` names the offending
    /// entry so callers can point at their config file.
    #[error("config error: `{key}`: {message}")]
    Config { key: String, message: String },

    /// Table or grid dimensions disagree (e.g. a warm-start cache built for
    /// a different state/action discretization).
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A warm-start cache was built against a different environment.
    #[error(
        "environment fingerprint mismatch: cache has {cache}, current environment is {current}"
    )]
    Fingerprint { cache: String, current: String },

    /// Underlying I/O failure while reading or writing artifacts.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Serialization or deserialization failure for persisted artifacts.
    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    /// Builds a [`Error::Domain`] from any displayable message.
    pub fn domain(message: impl Into<String>) -> Self {
        Error::Domain(message.into())
    }

    /// Builds a [`Error::Config`] that names the offending key.
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Serialization(err.to_string())
    }
}
