use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by the allocator, channel generator and simulator.
#[derive(Debug, Error)]
pub enum WpcnError {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration file or option set is inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, WpcnError>;

pub(crate) fn domain(msg: impl Into<String>) -> WpcnError {
    WpcnError::Domain(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> WpcnError {
    WpcnError::Config(msg.into())
}
