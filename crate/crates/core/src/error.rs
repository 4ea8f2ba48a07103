use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A query reaches too close to the edge of a finite window.
    #[error("radius {radius} exceeds the safe limit {limit} for this window (need radius <= margin/4)")]
    Truncation { radius: f64, limit: f64 },

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("graph {index} (seed {seed}) failed: {source}")]
    Member {
        index: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors caused by numerical breakdown rather than bad input.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::NotConverged { .. } | Error::Singular(_) => true,
            Error::Member { source, .. } => source.is_numeric(),
            _ => false,
        }
    }

    /// True for errors caused by configuration or arguments.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config(_)
            | Error::InvalidArgument(_)
            | Error::Truncation { .. }
            | Error::Parse { .. } => true,
            Error::Member { source, .. } => source.is_config(),
            _ => false,
        }
    }
}
