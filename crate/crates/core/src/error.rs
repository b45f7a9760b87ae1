use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {context}: expected {expected}, found {found}")]
    Shape {
        context: &'static str,
        expected: String,
        found: String,
    },

    #[error("matrix is not positive definite: pivot {pivot} is {value:e}")]
    Singular { pivot: usize, value: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("empty data: {0}")]
    EmptyData(&'static str),

    #[error("insufficient data: need at least {needed} samples, got {found}")]
    InsufficientData { needed: usize, found: usize },

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("model file error in field `{field}`: {message}")]
    ModelFormat { field: String, message: String },
}

impl Error {
    pub(crate) fn shape(
        context: &'static str,
        expected: impl ToString,
        found: impl ToString,
    ) -> Self {
        Error::Shape {
            context,
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    /// Short machine-readable tag for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Shape { .. } => "shape",
            Error::Singular { .. } => "singular",
            Error::Domain(_) => "domain",
            Error::Config(_) => "config",
            Error::EmptyData(_) => "empty_data",
            Error::InsufficientData { .. } => "insufficient_data",
            Error::Parse { .. } => "parse",
            Error::Schema(_) => "schema",
            Error::Io { .. } => "io",
            Error::ModelFormat { .. } => "model_format",
        }
    }
}
