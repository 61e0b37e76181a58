use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Env(#[from] satedge_core::Error),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("every action is masked")]
    AllMasked,
    #[error("non-finite gradient in update {update}")]
    NonFiniteGradient { update: usize },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
