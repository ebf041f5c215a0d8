use std::path::PathBuf;

use crate::histogram::Channel;

/// Errors produced by the enhancement library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("channel {0} is degenerate")]
    DegenerateChannel(Channel),

    #[error("invalid `{field}`: {message}")]
    Shape { field: String, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn shape(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Shape { field: field.into(), message: message.into() }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
