use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("score {value} at index {index} is outside [0, 1]")]
    ScoreOutOfRange { index: usize, value: f64 },

    #[error("length mismatch: {what} has {got} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("non-differentiable pruning: hard threshold has no useful derivative")]
    NonDifferentiablePruning,

    #[error("usage: {0}")]
    Usage(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error("scene {id}: {source}")]
    Scene {
        id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("could not place {objects} non-overlapping objects after {attempts} attempts")]
    InfeasiblePlacement { objects: usize, attempts: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::File {
            path: path.into(),
            source: Box::new(self),
        }
    }

    pub(crate) fn in_scene(self, id: &str) -> Self {
        Error::Scene {
            id: id.to_string(),
            source: Box::new(self),
        }
    }
}
