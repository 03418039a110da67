use std::path::PathBuf;

use thiserror::Error;

/// Failures of the command-line front end, each mapped to an exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid config value for {key}: {constraint}")]
    Validation { key: String, constraint: String },

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Core(#[from] surfnema::Error),

    #[error("{0}")]
    Verification(String),
}

impl CliError {
    /// 1 for bad input, 2 for runtime aborts, 3 for failed verification.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Parse { .. } | Self::Validation { .. } => 1,
            Self::Core(surfnema::Error::InvalidParameter { .. } | surfnema::Error::InvalidGrid { .. }) => 1,
            Self::Io { .. } | Self::Core(_) => 2,
            Self::Verification(_) => 3,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }
}
