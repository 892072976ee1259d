use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: malformed header: {reason}")]
    MalformedHeader { path: PathBuf, reason: String },

    #[error("{path}: attribute `{attribute}` is not numeric (value `{value}`)")]
    NonNumericFeature {
        path: PathBuf,
        attribute: String,
        value: String,
    },

    #[error("{path}: only one class present")]
    SingleClass { path: PathBuf },

    #[error("{path}: expected two classes, found {found}")]
    NotBinary { path: PathBuf, found: usize },

    #[error("{path}: no column named `{column}`")]
    MissingColumn { path: PathBuf, column: String },

    #[error("{path}: positive label `{label}` does not occur")]
    UnknownLabel { path: PathBuf, label: String },

    #[error("invalid experiment: {0}")]
    InvalidSpec(String),

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Core(#[from] gmote_core::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

pub(crate) fn io_error(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> HarnessError {
    let path = path.into();
    move |source| HarnessError::Io { path, source }
}
