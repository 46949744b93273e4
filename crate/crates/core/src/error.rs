use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("weight is nonpositive or non-finite at n = {n} (value {value})")]
    NonpositiveWeight { n: u64, value: f64 },

    #[error("{what} is not defined at n = {n} (available up to {limit})")]
    OutOfRange { what: String, n: u64, limit: u64 },

    #[error("|x_{index}| = {value} exceeds the declared bound {bound}")]
    BoundViolated { index: u64, value: f64, bound: f64 },

    #[error("negative entry a[{row},{col}] = {value}")]
    NegativeEntry { row: u64, col: u64, value: f64 },

    #[error("construction needs {needed} elements of the column set, only {available} available")]
    ShortEnumeration { needed: u64, available: u64 },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("internal consistency failure: {0}")]
    Consistency(String),

    #[error("test sequence is not ideal-convergent at this scale: {0}")]
    Suite(String),

    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub fn format(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
