//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

use crate::corpus::Label;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: malformed record: {msg}")]
    MalformedRecord {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}: no valid instances after skipping")]
    NoValidInstances { path: PathBuf },

    #[error("operation requires a non-empty corpus")]
    EmptyCorpus,

    #[error("corpus has {got} instances, need at least {need}")]
    CorpusTooSmall { need: usize, got: usize },

    #[error("label class {0} has no training instances")]
    MissingClass(Label),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("bigram \"{0}\" not present in table")]
    AbsentBigram(String),

    #[error("instance {id} is not in the model (double removal?)")]
    DoubleRemoval { id: String },

    #[error("tables are not comparable: {0}")]
    TableMismatch(String),

    #[error("reports cover different test corpora: {0}")]
    FingerprintMismatch(String),

    #[error("snapshot line {line}: {msg}")]
    Snapshot { line: usize, msg: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
