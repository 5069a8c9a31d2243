use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid sample at row {row}, column {col}: {msg}")]
    Data { row: usize, col: usize, msg: String },

    #[error("format error: {0}")]
    Format(String),

    #[error("truncated payload: expected {expected} bytes, found {actual}")]
    Truncated { expected: u64, actual: u64 },

    #[error("{line}:{col}: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },

    #[error("{line}:{col}: band `{symbol}` is not declared in the rule file preamble")]
    UndeclaredBand {
        symbol: String,
        line: usize,
        col: usize,
    },

    #[error("required band `{0}` is not present in the image")]
    MissingBand(String),

    #[error("mapping error: {0}")]
    Mapping(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("contingency table is empty (no co-valid pixels)")]
    EmptyOverlap,

    #[error("invalid threshold: {0}")]
    Threshold(String),

    #[error("override error: {0}")]
    Override(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
