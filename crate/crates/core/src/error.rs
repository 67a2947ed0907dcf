use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("signal must have at least 2 samples, got {0}")]
    SignalTooShort(usize),

    #[error("signal value at index {index} is not finite ({value})")]
    NonFiniteValue { index: usize, value: f64 },

    #[error("invalid landscape grid: {0}")]
    InvalidGrid(String),

    #[error("number of landscape levels must be at least 1")]
    NoLevels,

    #[error("signal {index} is invalid: {source}")]
    InvalidSignalAt {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: String, actual: String },

    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("sample {0} has no label")]
    MissingLabel(usize),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("class {class} has {count} samples, fewer than {folds} folds")]
    ScarceClass {
        class: usize,
        count: usize,
        folds: usize,
    },

    #[error("level selection needs at least 2 weights, got {0}")]
    TooFewWeights(usize),

    #[error("selected level {level} out of range 1..={levels}")]
    SelectionOutOfRange { level: usize, levels: usize },

    #[error("selection is empty")]
    EmptySelection,

    #[error("reconstruction needs unnormalized landscape levels")]
    NormalizedLandscape,

    #[error("nothing to reconstruct: no landscape value matched a critical point")]
    NothingReconstructable,

    #[error("target length {target} is shorter than signal length {length}")]
    PadTooShort { target: usize, length: usize },

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
