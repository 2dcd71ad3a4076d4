//! Full qualification of an environment: the three random-play regimes,
//! replay of committed recordings, and a per-level win-probability bound
//! from the state graph.

use std::fmt::Write as _;

use crate::recording::{replay_on, Outcome, ReplayVerdict};
use crate::registry::Registry;
use crate::validation::graph::{build_state_graph, Budgets, StopReason};
use crate::validation::regime::{run_regime, Regime, RegimeConfig, RegimeReport};
use crate::validation::winprob::{estimate_win_probability, win_probability_upper_bound, MAX_SWEEPS};
use crate::validation::ValidationError;

/// Random-policy win probability above which a level is rejected.
pub const WIN_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct QualifyConfig {
    pub seeds: Vec<u64>,
    pub regimes: Vec<Regime>,
    pub threshold: f64,
    pub graph_budgets: Budgets,
    pub graph_seed: u64,
}

impl Default for QualifyConfig {
    fn default() -> Self {
        Self {
            seeds: (1..=5).collect(),
            regimes: vec![Regime::Sanity50k, Regime::Deep1M, Regime::Sweep1M],
            threshold: WIN_THRESHOLD,
            graph_budgets: Budgets {
                max_nodes: Some(2_000_000),
                max_edges: Some(40_000_000),
                ..Budgets::default()
            },
            graph_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum QualifyFailure {
    Regime { regime: Regime },
    MissingWinRecording,
    ReplayMismatch { recording: usize, verdict: ReplayVerdict },
    ThresholdViolation { level: u32, upper: f64 },
    Graph { level: u32, error: ValidationError },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayCheck {
    pub recording: usize,
    pub outcome: Outcome,
    pub actions: usize,
    pub verdict: ReplayVerdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelCheck {
    pub level: u32,
    pub tutorial: bool,
    pub nodes: usize,
    pub edges: usize,
    pub fully_explored: bool,
    pub stop: StopReason,
    /// Exact value when the graph is fully explored and the solve converged.
    pub exact: Option<f64>,
    /// The bound compared with the threshold.
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualificationReport {
    pub game_id: String,
    pub regimes: Vec<RegimeReport>,
    pub replays: Vec<ReplayCheck>,
    pub levels: Vec<LevelCheck>,
    pub failures: Vec<QualifyFailure>,
    pub pass: bool,
}

impl QualificationReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "qualification {} {}", self.game_id, if self.pass { "PASS" } else { "FAIL" });
        for r in &self.regimes {
            out.push_str(&r.to_text());
        }
        for r in &self.replays {
            let _ = writeln!(
                out,
                "replay recording {} outcome {} actions {}: {}",
                r.recording,
                r.outcome,
                r.actions,
                match &r.verdict {
                    ReplayVerdict::Identical => "identical".to_string(),
                    ReplayVerdict::Mismatch { index, reason } => format!("mismatch at {index} ({reason})"),
                }
            );
        }
        for l in &self.levels {
            let _ = writeln!(
                out,
                "graph level {}{} nodes {} edges {} fully_explored {} p_win {} upper {:.3e}",
                l.level,
                if l.tutorial { " (tutorial)" } else { "" },
                l.nodes,
                l.edges,
                if l.fully_explored { "yes" } else { "no" },
                l.exact.map_or("-".to_string(), |p| format!("{p:.3e}")),
                l.upper
            );
        }
        for f in &self.failures {
            let _ = writeln!(out, "failure {f:?}");
        }
        out
    }
}

/// Qualifies `game_id`. The environment must be registered; its committed
/// recordings are replayed and at least one of them must be a win.
pub fn qualify(registry: &Registry, game_id: &str, config: &QualifyConfig) -> Result<QualificationReport, ValidationError> {
    let env = registry.get(game_id)?;
    let spec = env.spec().clone();
    let mut failures = Vec::new();

    let mut regimes = Vec::new();
    for &regime in &config.regimes {
        let Some(rc) = RegimeConfig::for_regime(regime, config.seeds.clone()) else {
            continue;
        };
        let report = run_regime(env.clone(), &rc)?;
        if !report.pass {
            failures.push(QualifyFailure::Regime { regime });
        }
        regimes.push(report);
    }

    let recordings = registry.recordings(game_id)?;
    if !recordings.iter().any(|r| r.outcome == Outcome::Win) {
        failures.push(QualifyFailure::MissingWinRecording);
    }
    let mut replays = Vec::new();
    for (i, rec) in recordings.iter().enumerate() {
        let verdict = replay_on(env.clone(), rec);
        if !verdict.is_identical() {
            failures.push(QualifyFailure::ReplayMismatch {
                recording: i,
                verdict,
            });
        }
        replays.push(ReplayCheck {
            recording: i,
            outcome: rec.outcome,
            actions: rec.len(),
            verdict,
        });
    }

    let mut levels = Vec::new();
    for level in 1..=spec.level_count {
        let tutorial = level == spec.tutorial_level;
        let graph = match build_state_graph(env.as_ref(), level, &config.graph_budgets, config.graph_seed) {
            Ok(g) => g,
            Err(error) => {
                failures.push(QualifyFailure::Graph { level, error });
                continue;
            }
        };
        let (exact, upper) = match estimate_win_probability(&graph) {
            Ok(w) => (w.exact, w.upper),
            // Fall back to the sweep bound, which is sound even when the
            // iteration has not converged.
            Err(_) => (None, win_probability_upper_bound(&graph, config.threshold, MAX_SWEEPS)),
        };
        if !tutorial && upper >= config.threshold {
            failures.push(QualifyFailure::ThresholdViolation { level, upper });
        }
        levels.push(LevelCheck {
            level,
            tutorial,
            nodes: graph.stats.node_count,
            edges: graph.stats.edge_count,
            fully_explored: graph.stats.fully_explored,
            stop: graph.stats.stop,
            exact,
            upper,
        });
    }

    Ok(QualificationReport {
        game_id: spec.game_id.to_string(),
        pass: failures.is_empty(),
        regimes,
        replays,
        levels,
        failures,
    })
}
