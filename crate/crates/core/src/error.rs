use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("zero-norm feature columns: {0:?}")]
    ZeroColumns(Vec<usize>),

    #[error("vector is not unit-norm (norm = {0})")]
    NotUnit(f64),

    #[error("threshold {0} outside [-1, 1]")]
    InvalidThreshold(f64),

    #[error("invalid cluster sets: {0}")]
    InvalidClusters(String),

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("{path}: bad IDX magic {found:#010x}, expected {expected:#010x}")]
    IdxMagic {
        path: PathBuf,
        found: u32,
        expected: u32,
    },

    #[error("{path}: truncated IDX payload ({needed} bytes needed, {available} available)")]
    IdxTruncated {
        path: PathBuf,
        needed: usize,
        available: usize,
    },

    #[error("IDX count mismatch: {images} images vs {labels} labels")]
    IdxCountMismatch { images: usize, labels: usize },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("weight archive: {0}")]
    Archive(String),

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
}
