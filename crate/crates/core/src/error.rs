use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size must be even and at least 4 (got {0})")]
    GridSize(usize),

    #[error("fields live on different grids ({left} vs {right} points)")]
    GridMismatch { left: usize, right: usize },

    #[error("non-finite value in {quantity} at t = {time}")]
    NumericalFailure { quantity: String, time: f64 },

    #[error("non-finite {quantity} in stage {stage} of the step starting at t = {time}")]
    StageFailure {
        stage: usize,
        time: f64,
        quantity: String,
    },

    #[error("blow-up suspected at t = {time}: {reason}")]
    BlowUpSuspected { time: f64, reason: String },

    #[error("config error at line {line}, key `{key}`: {message}")]
    Config {
        key: String,
        line: usize,
        message: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("velocity sampler is undefined at t = {time} (history covers [{start}, {end}])")]
    SamplerRange { time: f64, start: f64, end: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(key: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            line,
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::GridSize(_) | Error::InvalidArgument(_) => 2,
            Error::NumericalFailure { .. } | Error::StageFailure { .. } => 3,
            Error::BlowUpSuspected { .. } => 4,
            _ => 1,
        }
    }
}
