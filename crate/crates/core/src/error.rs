use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("synthesis filter is unstable (reflection coefficient {reflection} at stage {stage})")]
    UnstableFilter { stage: usize, reflection: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error at {context}: {message}")]
    Parse { context: String, message: String },

    #[error("unknown NFBL class `{0}`")]
    UnknownClass(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("length mismatch: {left} predictions vs {right} labels")]
    LengthMismatch { left: usize, right: usize },

    #[error("face detector unavailable: {0}")]
    DetectorUnavailable(String),

    #[error("inference client unavailable after {attempts} attempt(s): {message}")]
    ClientUnavailable { attempts: u32, message: String },

    #[error("inference client returned an empty response")]
    ResponseEmpty,

    #[error("no fixture transcript for request {hash}")]
    FixtureMissing { hash: String },

    #[error("judge reply could not be parsed after retry: {0}")]
    JudgeParse(String),

    #[error("audio container error in {path}: {message}")]
    Audio { path: PathBuf, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParam(msg.into())
    }

    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
