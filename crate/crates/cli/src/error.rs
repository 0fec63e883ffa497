use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] ancient_ricci::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    /// Configuration and input problems exit with 2; a numerical failure
    /// during a run counts as a failed check and exits with 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(ancient_ricci::Error::Config(_)) => 2,
            CliError::Core(_) => 1,
            _ => 2,
        }
    }
}
