use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the analysis library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("duplicate {kind} id(s): {}", ids.join(", "))]
    DuplicateIds { kind: &'static str, ids: Vec<String> },

    #[error("invalid {kind} record at row {row}: {message}")]
    InvalidRecord {
        kind: &'static str,
        row: usize,
        message: String,
    },

    #[error("not a screenplay: no character lines detected")]
    NotAScreenplay,

    #[error("insufficient data: {got} gaps, at least {need} required")]
    InsufficientData { got: usize, need: usize },

    #[error("degenerate distribution: all gaps are equal")]
    DegenerateDistribution,

    #[error("zero variance")]
    ZeroVariance,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True when the error stems from an input file that does not exist.
    pub fn is_missing_input(&self) -> bool {
        matches!(self, Error::Io { source, .. } if source.kind() == io::ErrorKind::NotFound)
    }

    /// True for content validation failures (bad ranges, duplicates, bad arguments).
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::DuplicateIds { .. } | Error::InvalidRecord { .. } | Error::InvalidArgument(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
