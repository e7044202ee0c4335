use std::fs::File;
use std::io::{self, BufReader, BufWriter};
use std::path::{Path, PathBuf};

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("node {node} out of range (node count {node_count})")]
    NodeOutOfRange { node: u64, node_count: usize },

    #[error("interval {t} out of range 1..={interval_count}")]
    IntervalOutOfRange { t: u64, interval_count: u32 },

    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),

    #[error("invalid window [{start}, {end}]")]
    InvalidWindow { start: u32, end: u32 },

    #[error("self loop on node {0}")]
    SelfLoop(u64),

    #[error("seed set is empty")]
    EmptySeedSet,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what}: size {size} exceeds bound {bound}")]
    BoundExceeded {
        what: &'static str,
        size: u128,
        bound: u128,
    },

    #[error("{source_name}:{line}: {message}")]
    Data {
        source_name: String,
        line: u64,
        message: String,
    },

    #[error("malformed hypergraph cache: {0}")]
    Cache(String),

    #[error("{}: {source}", path.display())]
    File { path: PathBuf, source: io::Error },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Resource,
}

impl ErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::Usage => "usage",
            ErrorKind::Data => "data",
            ErrorKind::Resource => "resource",
        }
    }
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidArgument(_) | Error::InvalidWindow { .. } | Error::EmptySeedSet => {
                ErrorKind::Usage
            }
            Error::BoundExceeded { .. } => ErrorKind::Resource,
            _ => ErrorKind::Data,
        }
    }

    pub(crate) fn data(source_name: &str, line: u64, message: impl Into<String>) -> Self {
        Error::Data {
            source_name: source_name.to_string(),
            line,
            message: message.into(),
        }
    }
}

pub(crate) fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })
}
