use std::io;
use std::path::{Path, PathBuf};

use metamat_core::Error as CoreError;

/// Pipeline error; each kind maps to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("argument error: {0}")]
    Argument(String),
    #[error("format error in {path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("missing dependency: {0}")]
    Dependency(String),
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

pub type Result<T> = std::result::Result<T, PipelineError>;

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Argument(_) => 2,
            PipelineError::Format { .. } => 3,
            PipelineError::Numerical(_) => 4,
            PipelineError::Dependency(_) => 5,
            PipelineError::Io { .. } => 3,
        }
    }

    pub fn format(path: &Path, message: impl Into<String>) -> Self {
        PipelineError::Format { path: path.to_path_buf(), message: message.into() }
    }

    pub fn at_offset(path: &Path, offset: u64, message: impl std::fmt::Display) -> Self {
        Self::format(path, format!("byte {offset}: {message}"))
    }

    pub fn io(path: &Path, source: io::Error) -> Self {
        PipelineError::Io { path: path.to_path_buf(), source }
    }

    /// Error for an upstream artifact that does not exist.
    pub fn missing(path: &Path, producer: &str) -> Self {
        PipelineError::Dependency(format!(
            "'{}' not found; produce it with `metamat {producer}`",
            path.display()
        ))
    }
}

impl From<CoreError> for PipelineError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Argument(_) | CoreError::Dimension(_) => PipelineError::Argument(e.to_string()),
            _ => PipelineError::Numerical(e.to_string()),
        }
    }
}
