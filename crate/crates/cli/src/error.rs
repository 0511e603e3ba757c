use std::path::PathBuf;
use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot parse {source_name}: {message}")]
    Parse { source_name: String, message: String },

    #[error("invalid configuration at `{path}`: {message}")]
    Validation { path: String, message: String },

    #[error("{0}")]
    Runtime(#[from] cavsim::Error),

    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write CSV: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Validation { path: path.into(), message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            Self::Parse { .. } => 2,
            Self::Validation { .. } => 3,
            Self::Runtime(_) | Self::Io { .. } | Self::Csv(_) => 4,
        })
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
