use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("{0}")]
    Runtime(#[from] qwgan::Error),

    #[error("seed {seed}: {source}")]
    Seed {
        seed: u64,
        #[source]
        source: qwgan::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("check failed: {0}")]
    CheckFailed(String),
}

impl CliError {
    /// Process exit status: 1 usage, 2 runtime failure, 3 failed check.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Runtime(_)
            | CliError::Seed { .. }
            | CliError::Io { .. }
            | CliError::Csv(_) => 2,
            CliError::CheckFailed(_) => 3,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}
