use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Factorization failure or non-finite arithmetic inside a solver.
    #[error("numeric failure{}: {message}", iteration.map(|t| format!(" at iteration {t}")).unwrap_or_default())]
    Numeric { message: String, iteration: Option<usize> },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed model file: {0}")]
    MalformedModel(String),

    #[error("unsupported model format version {found} (this build reads version {supported})")]
    VersionMismatch { found: u32, supported: u32 },

    #[error("inconsistent model: {0}")]
    InconsistentModel(String),

    #[error("{path}: row {row} has {found} fields, expected {expected}")]
    RaggedRow {
        path: PathBuf,
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("{path}: row {row}, column {column}: cannot parse {value:?} as a number")]
    NonNumeric {
        path: PathBuf,
        row: usize,
        column: usize,
        value: String,
    },

    #[error("{path}: row {row}: label {value:?} is not one of the two class labels {known:?}")]
    UnknownLabel {
        path: PathBuf,
        row: usize,
        value: String,
        known: Vec<String>,
    },

    #[error("{path}: label column {column} not found")]
    MissingLabelColumn { path: PathBuf, column: String },

    #[error("csv error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric {
            message: msg.into(),
            iteration: None,
        }
    }

    pub(crate) fn at_iteration(self, t: usize) -> Self {
        match self {
            Error::Numeric { message, .. } => Error::Numeric {
                message,
                iteration: Some(t),
            },
            other => other,
        }
    }
}
