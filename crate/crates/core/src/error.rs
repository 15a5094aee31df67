use thiserror::Error;

use crate::validate::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("instance is invalid: {0:?}")]
    InvalidInstance(Vec<Violation>),
    #[error("no path from source to sink")]
    SinkUnreachable,
    #[error("player {player}: invalid walk: {reason}")]
    InvalidWalk { player: usize, reason: String },
    #[error("profile has {got} walks but the instance has {expected} players")]
    ProfileSizeMismatch { got: usize, expected: usize },
    #[error("simulation exceeded its hard horizon of {horizon} steps (livelock)")]
    Livelock { horizon: u64 },
    #[error("search budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("priority list construction requires unit capacities (edge {edge} has capacity {capacity})")]
    NonUnitCapacity { edge: usize, capacity: u32 },
    #[error("{0}")]
    InvalidParameter(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
