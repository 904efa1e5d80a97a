use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Core(#[from] ccnode::Error),
}

impl CliError {
    pub fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Config { key: key.into(), reason: reason.into() }
    }

    pub fn exit_code(&self) -> u8 {
        use ccnode::Error as E;
        match self {
            CliError::Config { .. } => 2,
            CliError::Io { .. } => 1,
            CliError::Core(E::NoBracket(_)) => 4,
            CliError::Core(E::InvalidParameter { .. } | E::DimensionMismatch { .. } | E::ZeroNorm) => 2,
            CliError::Core(_) => 3,
        }
    }
}
