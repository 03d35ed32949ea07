use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised across the crate.
///
/// The variants are grouped by the exit code the CLI maps them to: invalid
/// configuration, I/O failures, and malformed input data.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected_h}x{expected_w}, found {found_h}x{found_w}")]
    DimensionMismatch {
        expected_h: usize,
        expected_w: usize,
        found_h: usize,
        found_w: usize,
    },

    #[error("PNM decode error in {field}: {reason}")]
    Decode { field: &'static str, reason: String },

    #[error("bad sequence magic {found:?}, expected \"DSA1\"")]
    BadMagic { found: [u8; 4] },

    #[error("truncated sequence file: {0}")]
    Truncated(String),

    #[error("sequence header schema violation: {0}")]
    Schema(String),

    #[error("record {record}: position index {found} inconsistent with center ({row}, {col}), expected {expected}")]
    PositionMismatch {
        record: usize,
        row: i32,
        col: i32,
        found: u32,
        expected: u64,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::DimensionMismatch { .. } => 2,
            Error::Io { .. } => 3,
            Error::Decode { .. }
            | Error::BadMagic { .. }
            | Error::Truncated(_)
            | Error::Schema(_)
            | Error::PositionMismatch { .. } => 4,
        }
    }
}
