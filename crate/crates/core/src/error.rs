use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates a documented domain constraint (e.g. `M < N_COL`).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("matrix is not positive definite; sensing rows are linearly dependent")]
    Singular,

    #[error("no support of size <= {k_max} reproduces the measurements")]
    Infeasible { k_max: usize },

    #[error("malformed PGM: {0}")]
    Pgm(String),

    #[error("bad magic in measurement file")]
    BadMagic,

    #[error("unsupported measurement file version {0}")]
    VersionMismatch(u16),

    #[error("measurement file payload-length mismatch: expected {expected} bytes, got {actual}")]
    PayloadLength { expected: usize, actual: usize },

    #[error("measurement file: {0}")]
    MeasurementFormat(String),

    #[error("benchmark spec: {0}")]
    Spec(String),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn file(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::File {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by unreadable/unwritable or malformed files,
    /// as opposed to parameter or domain violations.
    pub fn is_io(&self) -> bool {
        matches!(
            self,
            Error::File { .. }
                | Error::Io(_)
                | Error::Csv(_)
                | Error::Pgm(_)
                | Error::BadMagic
                | Error::VersionMismatch(_)
                | Error::PayloadLength { .. }
                | Error::MeasurementFormat(_)
        )
    }
}

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}
