use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config file not found: {}", .0.display())]
    ConfigNotFound(PathBuf),
    #[error("cannot parse {source_name}: {message}")]
    Parse { source_name: String, message: String },
    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("mismatched seeds: {0}")]
    MismatchedSeeds(String),
    #[error(transparent)]
    Core(#[from] satedge_core::Error),
    #[error(transparent)]
    Ppo(#[from] satedge_ppo::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn invalid(key: &str, message: impl Into<String>) -> Self {
        Error::Invalid { key: key.to_string(), message: message.into() }
    }
}
