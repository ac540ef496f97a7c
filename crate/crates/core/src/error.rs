//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an operation's inputs was violated.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Training data cannot produce a usable model (e.g. a single class).
    #[error("degenerate training data: {0}")]
    DegenerateTraining(String),

    /// A transform was applied before its training-side fit.
    #[error("not fitted: {0}")]
    NotFitted(String),

    /// A CSV or JSON artifact does not match its expected schema.
    #[error("schema error in {path}: {detail}")]
    Schema { path: String, detail: String },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn schema(path: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            detail: detail.into(),
        }
    }
}
