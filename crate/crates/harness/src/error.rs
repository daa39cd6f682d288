use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("missing input file {0}")]
    MissingInput(PathBuf),
    #[error("malformed {path}: {msg}")]
    Malformed { path: PathBuf, msg: String },
    #[error("integrity check failed: {0}")]
    Integrity(String),
    #[error(transparent)]
    Core(#[from] morphopt::Error),
}

impl HarnessError {
    /// Stable tag for the machine-readable error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Config(_) => "config",
            Self::Read { .. } => "read",
            Self::Write { .. } => "write",
            Self::MissingInput(_) => "missing-input",
            Self::Malformed { .. } => "malformed-input",
            Self::Integrity(_) => "integrity",
            Self::Core(morphopt::Error::NonFinite(_)) => "non-finite",
            Self::Core(_) => "model",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Read { .. } | Self::Write { .. } | Self::MissingInput(_) | Self::Malformed { .. } => 3,
            Self::Integrity(_) => 4,
            Self::Core(_) => 5,
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
