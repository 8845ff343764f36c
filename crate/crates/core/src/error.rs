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

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{path}: row {row}, column {column}: {message}")]
    Cell {
        path: PathBuf,
        row: usize,
        column: usize,
        message: String,
    },

    #[error("invalid signal record: {0}")]
    InvalidRecord(String),

    #[error("manifest: {0}")]
    Manifest(String),

    #[error("unsupported WFDB format {0}")]
    UnsupportedWfdbFormat(String),

    #[error("truncated signal file {path}: expected {expected} bytes, found {found}")]
    TruncatedSignal {
        path: PathBuf,
        expected: usize,
        found: usize,
    },

    #[error("filter: {0}")]
    Filter(String),

    #[error("record shorter than one window ({len} samples < {window} samples)")]
    RecordTooShort { len: usize, window: usize },

    #[error("feature extraction: {0}")]
    Feature(String),

    #[error("feature count mismatch: model expects {expected}, got {found}")]
    FeatureMismatch { expected: usize, found: usize },

    #[error("training data: {0}")]
    Training(String),

    #[error("single class: at least two classes are required")]
    SingleClass,

    #[error("evaluation: {0}")]
    Eval(String),

    #[error("config: {0}")]
    Config(String),

    #[error("serialization: {0}")]
    Serde(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
