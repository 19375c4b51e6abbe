use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("period length must be positive, got {0}")]
    InvalidPeriodLength(i64),

    #[error("period {requested} out of range (structure has {available} periods)")]
    PeriodOutOfRange { requested: usize, available: usize },

    #[error("invalid mention: {0}")]
    InvalidMention(String),

    #[error("invalid population: {0}")]
    InvalidPopulation(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid histogram: {0}")]
    InvalidHistogram(String),

    #[error("invalid class spec `{0}`")]
    InvalidClassSpec(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}
