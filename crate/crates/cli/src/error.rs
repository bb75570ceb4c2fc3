use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),

    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{0}")]
    Comparison(String),
}

impl CliError {
    /// 1 validation, 2 comparison failure, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Comparison(_) => 2,
            CliError::Io { .. } => 3,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    /// Library errors: I/O failures keep their own code, everything else is a
    /// validation problem with the inputs.
    pub fn from_lib(path: &Path, e: urngame::Error) -> Self {
        match e {
            urngame::Error::Io(msg) => CliError::Io { path: path.to_path_buf(), source: std::io::Error::other(msg) },
            other => CliError::Validation(format!("{}: {other}", path.display())),
        }
    }
}

impl From<urngame::Error> for CliError {
    fn from(e: urngame::Error) -> Self {
        match e {
            urngame::Error::Io(msg) => CliError::Io { path: PathBuf::new(), source: std::io::Error::other(msg) },
            other => CliError::Validation(other.to_string()),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
