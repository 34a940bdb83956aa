use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch in {op}: {lhs:?} vs {rhs:?}")]
    Shape {
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },

    #[error("{source_name}:{line}: {msg}")]
    Parse {
        source_name: String,
        line: usize,
        msg: String,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("reading out of range for {finger} electrode {electrode}: {value} not in [0, 4095]")]
    ReadingRange {
        finger: &'static str,
        electrode: usize,
        value: i64,
    },

    #[error("schema error: missing column `{0}`")]
    MissingColumn(String),

    #[error("row {row}: {msg}")]
    Row { row: usize, msg: String },

    #[error("model format error: {0}")]
    Format(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("model/config mismatch: {0}")]
    Mismatch(String),

    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by bad input data rather than by the
    /// environment or by the program state.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Validation(_)
                | Error::ReadingRange { .. }
                | Error::MissingColumn(_)
                | Error::Row { .. }
                | Error::Csv(_)
        )
    }
}
