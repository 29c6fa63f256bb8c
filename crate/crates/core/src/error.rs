use std::path::PathBuf;

use thiserror::Error;

use crate::machine::{RunOutcome, SpaceId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid space ({states},{colors}): need at least 1 state and 2 colors, and a size that fits in 64 bits")]
    InvalidSpace { states: u8, colors: u8 },

    #[error("rule {rule} is outside space {space}, which has {size} machines")]
    RuleOutOfRange { rule: u64, space: SpaceId, size: u64 },

    #[error("invalid transition table: {0}")]
    InvalidTable(String),

    #[error("rule {rule} on input {input} does not halt within budget ({:?} after {} steps), so it has no diagram", outcome.status, outcome.steps)]
    NoDiagram { rule: u64, input: usize, outcome: Box<RunOutcome> },

    #[error("refusing to sweep {space}: {size} machines is at or above the feasibility bound of {bound} (use --force)")]
    Infeasible { space: SpaceId, size: u64, bound: u64 },

    #[error("invalid probe set: {0}")]
    InvalidProbe(String),

    #[error("result set is incomplete; missing rule ranges: {0}")]
    Incomplete(String),

    #[error("probe sets differ: {0}")]
    ProbeMismatch(String),

    #[error("calibration fingerprints differ: `{0}` vs `{1}`")]
    FingerprintMismatch(String, String),

    #[error("too few data points for a runtime fit: need {needed}, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("rule {rule} does not halt on input {input} within budget")]
    NonHaltingProbe { rule: u64, input: usize },

    #[error("checkpoint at {path}: {reason}")]
    Checkpoint { path: PathBuf, reason: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
