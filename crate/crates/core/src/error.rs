//! Error type shared by all modules.

use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A vector argument was empty where at least one element is required.
    #[error("vector must have at least one element")]
    EmptyVector,

    /// A scalar or vector argument violated a precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A direction, sub-array, slot or round index was outside its valid range.
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    /// The requested array/sub-array partition is not supported.
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    /// The experiment configuration failed validation.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// An observation log did not match the sweep plan it claims to follow.
    #[error("protocol error: {0}")]
    Protocol(String),

    /// File I/O failure, with the offending path.
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 for configuration problems,
    /// 3 for runtime/I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::EmptyVector
            | Error::InvalidArgument(_)
            | Error::IndexOutOfRange(_)
            | Error::InvalidGeometry(_)
            | Error::InvalidConfig(_) => 2,
            Error::Protocol(_) | Error::Io { .. } => 3,
        }
    }
}
