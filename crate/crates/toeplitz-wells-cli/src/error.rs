//! CLI-level error type: library failures plus configuration and I/O.

use std::path::PathBuf;
use thiserror::Error;

/// Everything that can abort an experiment run.
#[derive(Debug, Error)]
pub enum CliError {
    /// Configuration rejected; `path` names the offending key.
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    /// Config file missing or unreadable.
    #[error("cannot read config `{path}`: {source}")]
    ConfigRead {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Lib(#[from] toeplitz_wells::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// Shorthand for a keyed validation failure.
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
