use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: file is empty or has no header row")]
    EmptyFile { path: PathBuf },

    #[error("{path}: label column not found: {column}")]
    MissingLabelColumn { path: PathBuf, column: String },

    /// `row` is the 1-based line number in the file (header is line 1).
    #[error("{path}: line {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        path: PathBuf,
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("{path}: line {row}, column {column}: {message}")]
    BadCell {
        path: PathBuf,
        row: usize,
        column: String,
        message: String,
    },

    #[error("{path}: no data rows")]
    NoRows { path: PathBuf },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("row has {found} features, model expects {expected}")]
    SchemaMismatch { expected: usize, found: usize },

    #[error("loss {loss} cannot be used with a {task} task")]
    LossTaskMismatch { loss: &'static str, task: &'static str },

    #[error("cannot fit a tree on an empty row subset")]
    EmptySubset,

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("region expression: {0}")]
    Region(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input rather than runtime failures.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io { .. } | Error::Csv(_))
    }
}
