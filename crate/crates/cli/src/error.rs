use std::path::{Path, PathBuf};

use socratic_server::ApiError;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),

    #[error("conflict: {0}")]
    Conflict(String),

    #[error("{path}: {error}")]
    Io { path: PathBuf, error: std::io::Error },

    #[error("API call {call} failed: {error}")]
    Api { call: String, error: ApiError },

    #[error(transparent)]
    Core(#[from] socratic_core::Error),

    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn io(path: impl AsRef<Path>, error: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().to_path_buf(),
            error,
        }
    }

    /// 0 success, 1 validation, 2 I/O, 3 internal.
    pub fn exit_code(&self) -> u8 {
        use socratic_core::Error as E;
        match self {
            CliError::Validation(_) | CliError::Conflict(_) => 1,
            CliError::Io { .. } => 2,
            CliError::Api { .. } | CliError::Internal(_) => 3,
            CliError::Core(e) => match e {
                E::Validation(_)
                | E::Conflict(_)
                | E::Schema(_)
                | E::Mapping { .. }
                | E::Configuration(_)
                | E::Pairing { .. } => 1,
                E::Io(_) => 2,
                _ => 3,
            },
        }
    }
}

pub(crate) fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub(crate) fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

pub(crate) fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}
