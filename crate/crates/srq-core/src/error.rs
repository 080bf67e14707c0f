//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SrqError {
    /// Matrix or vector dimensions do not match the operation's requirements.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// A site or basis index lies outside its valid range.
    #[error("index error: {0}")]
    Index(String),

    /// Inputs lie outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested computation exceeds a configured resource cap.
    #[error("resource error: {0}")]
    Resource(String),

    /// A text input (state file, partition spec, config) failed to parse.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// An identity that holds in exact arithmetic was violated beyond
    /// tolerance; this signals a bug rather than bad input.
    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SrqError>;
