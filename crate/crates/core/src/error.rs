use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid point cloud: {0}")]
    InvalidCloud(String),

    #[error("invalid radius function: {0}")]
    InvalidRadius(String),

    #[error("value {value} is below the range of the radius function (lower bound {lower})")]
    OutOfRange { value: f64, lower: f64 },

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("simplex cap exceeded: {count} simplices would exceed the cap of {cap}")]
    SimplexCap { count: usize, cap: usize },

    #[error(
        "filtration is not closed under faces: simplex {simplex:?} is missing its face {face:?}"
    )]
    MissingFace {
        simplex: Vec<usize>,
        face: Vec<usize>,
    },

    #[error(
        "minimax solver did not converge after {iterations} iterations (residual {residual:e})"
    )]
    SolverFailure { iterations: usize, residual: f64 },

    #[error("instance too large for the dense rank oracle: {0} simplices")]
    TooLarge(usize),

    #[error("invalid relation: {0}")]
    InvalidRelation(String),

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
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

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
