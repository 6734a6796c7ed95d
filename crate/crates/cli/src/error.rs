use std::path::PathBuf;

use decoherence_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    /// Process exit status: 1 configuration or I/O, 2 numerical, 3 failed verification.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) | Self::Io { .. } => 1,
            Self::Core(e) => match e {
                CoreError::Domain(_)
                | CoreError::Config(_)
                | CoreError::Normalization(_)
                | CoreError::Cutoff { .. } => 1,
                _ => 2,
            },
            Self::Numerical(_) => 2,
            Self::Verification(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
