use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A caller broke an interface contract, e.g. submitted a masked action.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// The uplink to the chosen satellite carries no data (zero Shannon rate).
    #[error("infeasible link to satellite {satellite}: rate is zero")]
    InfeasibleLink { satellite: usize },

    #[error("episode already finished")]
    EpisodeFinished,
}
