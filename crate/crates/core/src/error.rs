use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value in element {element}: {what}")]
    NonFiniteElement { element: usize, what: String },

    #[error("non-finite value at ({x}, {y}): {what}")]
    NonFiniteAt { x: f64, y: f64, what: String },

    #[error("singular matrix: no usable pivot in column {column}")]
    Singular { column: usize },

    #[error("linear solve failed in {subsystem} subsystem: {source}")]
    Subsystem {
        subsystem: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("time step {index} failed: {source}")]
    Step {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("invalid config: {0}")]
    ConfigValue(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_subsystem(self, subsystem: &'static str) -> Self {
        Error::Subsystem {
            subsystem,
            source: Box::new(self),
        }
    }
}
