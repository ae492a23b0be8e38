use thiserror::Error;

/// Errors produced by matrix construction, estimation, testing and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("invalid quantile table: {0}")]
    InvalidTable(String),

    #[error("parse error in {path} at {location}: {reason}")]
    Parse {
        path: String,
        location: String,
        reason: String,
    },

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
