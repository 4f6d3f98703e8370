use std::io;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A value violated a domain invariant (reward range, propensity, dimensions).
    #[error("validation failed: {0}")]
    Validation(String),

    /// An estimator was asked to evaluate an empty log.
    #[error("log is empty")]
    EmptyLog,

    /// A linear-algebra routine failed (e.g. a matrix lost positive definiteness).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Malformed input file.
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Bad experiment configuration.
    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Validation(msg.into()))
}
