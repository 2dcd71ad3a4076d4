//! Environment validation: random-play qualification regimes and state-graph
//! solvability analysis.

pub mod graph;
pub mod qualify;
pub mod regime;
pub mod winprob;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::session::EngineError;

pub use graph::{build_state_graph, Budgets, GraphEdge, GraphNode, GraphStats, StateGraph, StopReason};
pub use qualify::{qualify, QualificationReport, QualifyConfig, QualifyFailure, WIN_THRESHOLD};
pub use regime::{run_regime, Crash, Regime, RegimeConfig, RegimeReport};
pub use winprob::{
    clopper_pearson, estimate_win_probability, monte_carlo, zero_win_upper_bound, MonteCarloEstimate, Method,
    WinProbability,
};

/// Terminal mark of a state-graph node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Terminal {
    LevelWin,
    EnvWin,
    GameOver,
}

impl Terminal {
    pub fn name(self) -> &'static str {
        match self {
            Terminal::LevelWin => "LEVEL_WIN",
            Terminal::EnvWin => "ENV_WIN",
            Terminal::GameOver => "GAME_OVER",
        }
    }

    pub fn is_win(self) -> bool {
        matches!(self, Terminal::LevelWin | Terminal::EnvWin)
    }
}

impl fmt::Display for Terminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Terminal {
    type Err = ValidationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "LEVEL_WIN" => Ok(Terminal::LevelWin),
            "ENV_WIN" => Ok(Terminal::EnvWin),
            "GAME_OVER" => Ok(Terminal::GameOver),
            _ => Err(ValidationError::GraphFormat {
                line: 0,
                message: format!("unknown terminal mark {s:?}"),
            }),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValidationError {
    #[error("every exploration budget is unbounded")]
    BudgetsAllUnbounded,
    #[error("level {level} is outside 1..={level_count}")]
    LevelOutOfRange { level: u32, level_count: u32 },
    #[error("the graph has no nodes")]
    EmptyGraph,
    #[error("linear solve over {unknowns} states did not converge")]
    SingularSystem { unknowns: usize },
    #[error("invalid regime configuration: {0}")]
    InvalidConfig(String),
    #[error("graph file line {line}: {message}")]
    GraphFormat { line: usize, message: String },
    #[error(transparent)]
    Engine(#[from] EngineError),
}
