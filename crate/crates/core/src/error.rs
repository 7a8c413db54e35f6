use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    /// A masked metric was requested over a region with zero total weight.
    #[error("mask has zero total weight; the masked region is undefined")]
    EmptyMask,

    #[error("every pixel is a hole; nothing to propagate")]
    AllHoles,

    #[error("image is {width}x{height}, smaller than the {window}x{window} window")]
    TooSmall {
        width: usize,
        height: usize,
        window: usize,
    },

    #[error("empty dataset: {0}")]
    EmptyDataset(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn dims(what: &str, a: (usize, usize), b: (usize, usize)) -> Self {
        Error::DimensionMismatch(format!("{what}: {}x{} vs {}x{}", a.0, a.1, b.0, b.1))
    }

    /// True for errors caused by bad inputs (files, arguments, shapes) rather
    /// than a failure inside the library.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::AllHoles)
    }
}
