//! Crate-wide error type.
//!
//! Variants are grouped by how the CLI maps them to exit codes: usage and
//! configuration problems, data/format problems, and numeric failures.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Tensor or layer dimensions do not line up.
    #[error("shape error: {0}")]
    Shape(String),

    /// A precondition on the input domain was violated.
    #[error("domain error: {0}")]
    Domain(String),

    /// Non-finite values where finite ones are required.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A text cell could not be parsed; names the offending row/column.
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    /// A binary file is malformed; names the byte offset.
    #[error("format error at byte offset {offset}: {message}")]
    Format { offset: u64, message: String },

    /// An import manifest references columns the data does not have.
    #[error("manifest error: {0}")]
    Manifest(String),

    /// Invalid run configuration or command-line usage.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code the CLI uses for this error: 1 for usage/config,
    /// 2 for data/format, 3 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Numeric(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
