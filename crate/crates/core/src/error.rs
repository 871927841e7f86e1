use thiserror::Error;

use crate::lp::LpStatus;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The instance failed validation; each entry names the offending field.
    #[error("invalid instance: {}", .0.join("; "))]
    InvalidInstance(Vec<String>),

    /// A state space grew past the configured cap.
    #[error("state space of {scope} exceeds the cap of {limit} states")]
    Sizing { scope: String, limit: usize },

    #[error("LP solve failed: {0:?}")]
    Lp(LpStatus),

    #[error("LP iteration cap of {0} pivots exceeded")]
    IterationLimit(usize),

    /// An LP solution that cannot come from an optimal basis of the block it claims to describe.
    #[error("corrupt LP solution: {0}")]
    CorruptSolution(String),

    /// A policy that does not fit the instance it is run against.
    #[error("policy mismatch: {0}")]
    PolicyMismatch(String),

    #[error("invalid marking: {0}")]
    InvalidMarking(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
