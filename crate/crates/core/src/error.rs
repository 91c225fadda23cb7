use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the curvature pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed input at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("malformed binary distance matrix: {0}")]
    Format(String),

    #[error("invalid distance matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid point cloud: {0}")]
    InvalidCloud(String),

    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "graph is disconnected: node {to} is unreachable from node {from}; \
         try a larger neighbor count k"
    )]
    Disconnected { from: usize, to: usize },

    #[error("density estimate is zero at point {index}; increase the bandwidth (currently {bandwidth})")]
    ZeroDensity { index: usize, bandwidth: f64 },

    #[error("sample has no Euclidean embedding: {0}")]
    NotEmbedded(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
