use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid pose: {0}")]
    InvalidPose(String),

    #[error("invalid expression template: {0}")]
    InvalidTemplate(String),

    #[error("invalid servo calibration: {0}")]
    InvalidCalibration(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown phoneme `{0}`")]
    UnknownPhoneme(String),

    #[error("invalid viseme table: {0}")]
    InvalidVisemeTable(String),

    #[error("invalid transcript: {0}")]
    InvalidTranscript(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("image must be {expected_w}x{expected_h}, got {actual_w}x{actual_h}")]
    ImageSize {
        expected_w: usize,
        expected_h: usize,
        actual_w: usize,
        actual_h: usize,
    },

    #[error("singular configuration: {0}")]
    Singular(String),

    #[error("nothing to retain: samples have zero variance")]
    ZeroVariance,

    #[error("non-finite feature value in sample {sample}, component {component}")]
    NonFinite { sample: usize, component: usize },

    #[error("training data needs both classes, got only {0}")]
    SingleClass(String),

    #[error("unknown class label `{0}`")]
    UnknownLabel(String),

    #[error("structural error: {0}")]
    Structure(String),

    #[error("parse error in {path}: line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
