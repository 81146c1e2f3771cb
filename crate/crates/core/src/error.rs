use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("schema error in {file}: {message}")]
    Schema { file: PathBuf, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("insufficient repetitions: found {found}, need at least {required}")]
    InsufficientRepetitions { found: usize, required: usize },

    #[error("zero-duration repetition: first and last timestamps are both {0}")]
    ZeroDuration(f64),

    #[error("duplicate timestamp at sample {0}: cannot differentiate")]
    DuplicateTimestamp(usize),

    #[error("joints {0} and {1} both have zero range of motion; relative phase is undefined")]
    BothJointsDegenerate(usize, usize),

    #[error("dataset '{dataset}', repetition {repetition}: {source}")]
    Repetition {
        dataset: String,
        repetition: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("serialization error: {0}")]
    Serialize(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by the inputs or configuration rather than by
    /// the computation itself. The CLI maps these to exit code 2.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Io { .. }
            | Error::Schema { .. }
            | Error::Validation(_)
            | Error::Parameter(_)
            | Error::Config(_)
            | Error::InsufficientRepetitions { .. } => true,
            Error::Repetition { source, .. } => source.is_input_error(),
            _ => false,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
