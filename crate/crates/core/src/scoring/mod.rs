//! Relative human action efficiency.
//!
//! A level scores `min(1, h / a)^2`, where `h` is the human baseline action
//! count and `a` the actions the player took; unsolved levels score 0. An
//! environment's score is the mean of its level scores weighted by level
//! index, and the benchmark total is the plain mean over environments.

pub mod baseline;
pub mod scorecard;

use std::fmt;

use thiserror::Error;

use crate::recording::Recording;

pub use baseline::{extract_baseline, HumanBaseline, LevelBaseline};
pub use scorecard::{score_counts, score_recording, EnvironmentScorecard, LevelScore, Scorecard};

/// Agents are cut off after this many times the human baseline on a level.
pub const CUTOFF_MULTIPLIER: u64 = 5;
/// Attempts need strictly more actions than this.
pub const MIN_ATTEMPT_ACTIONS: u64 = 30;
/// Attempts must last strictly less than this.
pub const MAX_ATTEMPT_MS: u64 = 30 * 60 * 1000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScoringError {
    #[error("human baseline must be at least 1, got {0}")]
    NonPositiveBaseline(u64),
    #[error("an environment needs at least one level score")]
    EmptyLevelList,
    #[error("{scores} level scores for {levels} levels")]
    LevelCountMismatch { scores: usize, levels: usize },
    #[error("no environment scores")]
    EmptyDataset,
    #[error("{game_id} has {solvers} full solvers; at least 2 are required")]
    InsufficientSolvers { game_id: String, solvers: usize },
    #[error("level {level}: optimal reference {optimal} exceeds best first run {best}")]
    InconsistentReference { level: u32, optimal: u64, best: u64 },
    #[error("the optimal reference recording does not solve {0}")]
    UnsolvedReference(String),
    #[error("recording is for {recording}, baseline for {baseline}")]
    GameMismatch { recording: String, baseline: String },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

/// Actions a player spent on a level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LevelActions {
    Solved(u64),
    Unsolved,
}

impl fmt::Display for LevelActions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LevelActions::Solved(a) => write!(f, "{a}"),
            LevelActions::Unsolved => f.write_str("unsolved"),
        }
    }
}

/// One level's result for one environment run.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelResult {
    pub game_id: String,
    pub level: u32,
    pub actions: LevelActions,
    pub elapsed_s: Option<f64>,
}

/// `min(1, h / a)^2`, or 0 when unsolved.
pub fn level_efficiency(h: u64, a: LevelActions) -> Result<f64, ScoringError> {
    if h < 1 {
        return Err(ScoringError::NonPositiveBaseline(h));
    }
    match a {
        LevelActions::Unsolved | LevelActions::Solved(0) => Ok(0.0),
        LevelActions::Solved(a) if a <= h => Ok(1.0),
        // One rounding: h^2 / a^2 over exact integers.
        LevelActions::Solved(a) => Ok((h as u128 * h as u128) as f64 / (a as u128 * a as u128) as f64),
    }
}

/// Level weights `l / (n (n + 1) / 2)` for `l = 1..=n`.
pub fn level_weights(n: usize) -> Vec<f64> {
    let total = (n * (n + 1) / 2) as f64;
    (1..=n).map(|l| l as f64 / total).collect()
}

/// `sum l * S_l / sum l` over `n` levels. `scores` may be shorter than `n`
/// (unplayed levels count as 0) but not longer.
pub fn environment_score(scores: &[f64], n: usize) -> Result<f64, ScoringError> {
    if n == 0 {
        return Err(ScoringError::EmptyLevelList);
    }
    if scores.len() > n {
        return Err(ScoringError::LevelCountMismatch {
            scores: scores.len(),
            levels: n,
        });
    }
    let weighted: f64 = scores.iter().enumerate().map(|(i, s)| (i + 1) as f64 * s).sum();
    Ok((weighted / (n * (n + 1) / 2) as f64).clamp(0.0, 1.0))
}

/// Mean of the environment scores.
pub fn total_score(scores: &[f64]) -> Result<f64, ScoringError> {
    if scores.is_empty() {
        return Err(ScoringError::EmptyDataset);
    }
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

/// Largest number of actions an agent may spend on a level.
pub fn cutoff_budget(h: u64) -> u64 {
    CUTOFF_MULTIPLIER * h
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvalidReason {
    TooFewActions,
    TooLong,
    /// The recording carries no timestamps.
    NoDuration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttemptValidity {
    Valid,
    Invalid(InvalidReason),
}

/// An attempt counts iff it has more than 30 actions and lasted less than
/// 30 minutes.
pub fn attempt_filter(actions: u64, duration_ms: u64) -> AttemptValidity {
    if actions <= MIN_ATTEMPT_ACTIONS {
        AttemptValidity::Invalid(InvalidReason::TooFewActions)
    } else if duration_ms >= MAX_ATTEMPT_MS {
        AttemptValidity::Invalid(InvalidReason::TooLong)
    } else {
        AttemptValidity::Valid
    }
}

pub fn attempt_filter_recording(rec: &Recording) -> AttemptValidity {
    match rec.duration_ms() {
        Some(ms) => attempt_filter(rec.len() as u64, ms),
        None if rec.len() as u64 <= MIN_ATTEMPT_ACTIONS => AttemptValidity::Invalid(InvalidReason::TooFewActions),
        None => AttemptValidity::Invalid(InvalidReason::NoDuration),
    }
}
