use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input data or a model failed validation.
    #[error("validation error: {0}")]
    Validation(String),

    /// The operation is only defined for another dimension.
    #[error("unsupported dimension: expected {expected}, got {got}")]
    UnsupportedDimension { expected: String, got: usize },

    /// A point lies on a cell boundary where the derivative does not exist.
    #[error("point lies on a cell boundary along axis {axis} (u = {value})")]
    Boundary { axis: usize, value: f64 },

    /// A contingency table has an empty row or column.
    #[error("degenerate margin: {0}")]
    DegenerateMargin(String),

    /// Malformed input text.
    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A numerical routine produced a non-finite or inconsistent value.
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn parse(source_name: impl Into<String>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.into(),
            line,
            message: msg.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
