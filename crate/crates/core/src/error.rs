//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Operand shapes do not conform. `detail` names both shapes.
    #[error("shape mismatch in {op}: {detail}")]
    Shape { op: &'static str, detail: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// CSV ingestion failure; `row` is the 1-based data row (header excluded).
    #[error("ingestion error at row {row}: {message}")]
    Ingest { row: usize, message: String },

    // The wrapped errors carry the message; repeating it here would print
    // twice in renderers that walk the source chain.
    #[error("i/o error")]
    Io(#[from] std::io::Error),

    #[error("csv error")]
    Csv(#[from] csv::Error),

    #[error("not a model file (bad magic bytes)")]
    ModelBadMagic,

    #[error("unsupported model format version {found} (this build reads version {supported})")]
    ModelVersion { found: u32, supported: u32 },

    #[error("model file truncated while reading {context}")]
    ModelTruncated { context: String },

    #[error("model file inconsistent: {0}")]
    ModelInconsistent(String),

    #[error("training error: {0}")]
    Training(String),

    /// Invariant violation that indicates a bug, e.g. stale caches.
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn shape(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Shape {
            op,
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
