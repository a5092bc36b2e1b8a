//! Crate-wide error type with a stable mapping to process exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input that failed to parse at all.
    #[error("parse error at byte offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    /// Input parsed but violates the expected record shape.
    #[error("schema error: {0}")]
    Schema(String),

    /// Timestamps or sequence positions out of order.
    #[error("ordering error: {0}")]
    Ordering(String),

    /// Tensor or vector dimensions do not line up.
    #[error("shape error: {0}")]
    Shape(String),

    /// Non-finite values or numeric overflow during computation.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A dataset cannot be partitioned as requested.
    #[error("partition error: {0}")]
    Partition(String),

    /// Two inputs do not cover a common range.
    #[error("range error: {0}")]
    Range(String),

    /// Invalid configuration, rejected before any stage runs.
    #[error("config error: {0}")]
    Config(String),

    /// A persisted artifact failed its integrity check.
    #[error("corruption error: {0}")]
    Corruption(String),

    /// A persisted artifact has an unsupported format version.
    #[error("version error: file has format version {found}, this build supports {supported}")]
    Version { found: u32, supported: u32 },

    #[error("data error in {path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Exit code contract: 0 success, 2 validation, 3 data error, 4 numeric error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Numeric(_) => 4,
            _ => 3,
        }
    }

    pub(crate) fn file(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::File {
            path: path.display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
