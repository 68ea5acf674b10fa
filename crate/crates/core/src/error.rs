use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Mismatched tensor or network dimensions.
    #[error("shape error: {0}")]
    Shape(String),

    /// An argument violated an operation's precondition.
    #[error("invalid input: {0}")]
    Input(String),

    /// A non-finite gradient reached the optimizer.
    #[error("non-finite gradient in layer {layer}")]
    NonFinite { layer: usize },

    /// Malformed line in a data or checkpoint file (1-based line numbers).
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// An operation needs target labels but only the unlabeled view exists.
    #[error("target labels unavailable: {0}")]
    LabelsUnavailable(String),

    /// Invalid experiment or training configuration.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
