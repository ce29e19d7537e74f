use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the extraction, matching and evaluation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot decode image: {0}")]
    InputFormat(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("block at ({x}, {y}) of size {size} exceeds {width}x{height} bounds")]
    Bounds {
        x: usize,
        y: usize,
        size: usize,
        width: usize,
        height: usize,
    },

    #[error("precondition violated: {0}")]
    Precondition(&'static str),

    #[error("feature encoding error: {0}")]
    Encoding(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unsupported descriptor version {found} (expected HFD1)")]
    Version { found: String },

    #[error("descriptor `{0}` has no entries")]
    DegenerateDescriptor(String),

    #[error("config fingerprint mismatch: probe {probe}, gallery {gallery}")]
    Compatibility { probe: String, gallery: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("metrics undefined: all confusion counts are zero")]
    EmptyReport,

    #[error("{}: {source}", path.display())]
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

    /// Process exit code for the command-line tool: 2 for I/O failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
