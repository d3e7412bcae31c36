use thiserror::Error;

use crate::mdp::ValidationReport;

#[derive(Debug, Error)]
pub enum Error {
    /// Array shapes do not match the declared state/action counts.
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("model failed validation: {0}")]
    Validation(ValidationReport),

    #[error("induced chain is not ergodic: {0}")]
    NotErgodic(String),

    #[error("state {state} has zero occupancy mass")]
    DegenerateOccupancy { state: usize },

    #[error("no steps recorded")]
    EmptyHistory,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("gradient entry {index} overflows; use log-domain gradient weights")]
    Overflow { index: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("simplex stalled after {iterations} pivots (phase {phase})")]
    SolverStall { iterations: usize, phase: u8 },

    #[error("need at least {needed} points, have {have}")]
    TooFewPoints { needed: usize, have: usize },

    #[error("episode schedule overflows 64-bit step counter at episode {episode}")]
    ScheduleOverflow { episode: u64 },

    #[error("model file: {0}")]
    ModelFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
