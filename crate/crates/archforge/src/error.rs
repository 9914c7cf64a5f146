//! Error types shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller violated a documented precondition (shape mismatch, empty input, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Invalid configuration value or flag combination.
    #[error("configuration error: {0}")]
    Config(String),

    /// A computation produced a non-finite value where a finite one was required.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// IDX file with an unexpected magic number.
    #[error("bad magic number: expected {expected:#010x}, found {found:#010x}")]
    BadMagic { expected: u32, found: u32 },

    /// IDX file ended before the declared payload was read.
    #[error("truncated payload: needed {needed} bytes, got {got}")]
    Truncated { needed: usize, got: usize },

    /// Image and label files declare different sample counts.
    #[error("count mismatch: {images} images vs {labels} labels")]
    CountMismatch { images: usize, labels: usize },

    #[error("checkpoint format error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
