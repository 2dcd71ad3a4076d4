//! Random-play qualification regimes.
//!
//! Each job plays one level (or, for a sweep, every level in turn) with the
//! uniform random policy over the declared action set. An episode ends on a
//! level win, on GAME_OVER or after [`EPISODE_CAP`] steps; the level is then
//! reopened from its reset state. Panics inside the environment are caught
//! and reported with the shortest trailing action sequence that reproduces
//! them from the level's reset state.

use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::action::{Action, ActionKind};
use crate::digest::state_digest;
use crate::env::Environment;
use crate::frame::{Frame, FrameError, GRID_SIZE};
use crate::session::{Session, Status};
use crate::validation::winprob::one_sided_upper_bound;
use crate::validation::ValidationError;

pub const SANITY_STEPS: u64 = 50_000;
pub const DEEP_STEPS: u64 = 1_000_000;
pub const EPISODE_CAP: u64 = 10_000;
/// Sweep regimes re-check purity and render consistency this often.
pub const CONSISTENCY_PERIOD: u64 = 64;
/// Confidence of the per-level upper bound in a report.
pub const REPORT_CONFIDENCE: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Sanity50k,
    Deep1M,
    Sweep1M,
    /// Replay of committed recordings. Not a random-play regime; present so
    /// reports can name it.
    ReplayQual,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Sanity50k => "sanity-50k",
            Regime::Deep1M => "deep-1m",
            Regime::Sweep1M => "sweep-1m",
            Regime::ReplayQual => "replay",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegimeConfig {
    pub regime: Regime,
    /// Steps per seed and level when `per_level`, per seed otherwise.
    pub step_budget: u64,
    pub seeds: Vec<u64>,
    /// Play each level from its own reset state. When false the budget is
    /// split evenly across the levels.
    pub per_level: bool,
}

impl RegimeConfig {
    pub fn sanity(seeds: Vec<u64>) -> Self {
        Self {
            regime: Regime::Sanity50k,
            step_budget: SANITY_STEPS,
            seeds,
            per_level: true,
        }
    }

    pub fn deep(seeds: Vec<u64>) -> Self {
        Self {
            regime: Regime::Deep1M,
            step_budget: DEEP_STEPS,
            seeds,
            per_level: true,
        }
    }

    pub fn sweep(seeds: Vec<u64>) -> Self {
        Self {
            regime: Regime::Sweep1M,
            step_budget: DEEP_STEPS,
            seeds,
            per_level: false,
        }
    }

    pub fn for_regime(regime: Regime, seeds: Vec<u64>) -> Option<Self> {
        match regime {
            Regime::Sanity50k => Some(Self::sanity(seeds)),
            Regime::Deep1M => Some(Self::deep(seeds)),
            Regime::Sweep1M => Some(Self::sweep(seeds)),
            Regime::ReplayQual => None,
        }
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        let bad = |m: &str| Err(ValidationError::InvalidConfig(m.to_string()));
        if self.seeds.is_empty() {
            return bad("no seeds");
        }
        match self.regime {
            Regime::Sanity50k if self.step_budget > SANITY_STEPS => bad("sanity budget above 50,000 steps"),
            Regime::Deep1M | Regime::Sweep1M if self.step_budget != DEEP_STEPS => bad("deep and sweep budgets are 1,000,000 steps"),
            Regime::ReplayQual => bad("replay is not a random-play regime"),
            _ => Ok(()),
        }
    }
}

/// An environment panic, with a trace that reproduces it from the reset
/// state of `level` in a session opened with `seed`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Crash {
    pub seed: u64,
    pub level: u32,
    pub trace: Vec<Action>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MalformedFrame {
    pub seed: u64,
    pub level: u32,
    pub step: u64,
    pub error: FrameError,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inconsistency {
    pub seed: u64,
    pub level: u32,
    pub step: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    pub game_id: String,
    pub regime: Regime,
    pub tutorial_level: u32,
    /// Indexed by level - 1.
    pub wins: Vec<u64>,
    pub episodes: Vec<u64>,
    pub steps_per_level: Vec<u64>,
    pub crashes: Vec<Crash>,
    pub malformed: Vec<MalformedFrame>,
    pub inconsistencies: Vec<Inconsistency>,
    pub steps: u64,
    pub elapsed: Duration,
    pub steps_per_second: f64,
    pub pass: bool,
}

impl RegimeReport {
    /// Non-tutorial levels won at least once.
    pub fn won_levels(&self) -> Vec<u32> {
        (1..=self.wins.len() as u32)
            .filter(|&l| l != self.tutorial_level && self.wins[l as usize - 1] > 0)
            .collect()
    }

    /// One-sided 95% upper bound on the per-episode win rate of `level`.
    pub fn win_rate_upper_bound(&self, level: u32) -> f64 {
        let i = level as usize - 1;
        one_sided_upper_bound(self.wins[i], self.episodes[i], REPORT_CONFIDENCE)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "regime {} game {} pass {}\nsteps {} elapsed_s {:.3} steps_per_second {:.0}\n",
            self.regime,
            self.game_id,
            if self.pass { "yes" } else { "no" },
            self.steps,
            self.elapsed.as_secs_f64(),
            self.steps_per_second
        );
        for l in 1..=self.wins.len() as u32 {
            let i = l as usize - 1;
            out.push_str(&format!(
                "level {l}{} steps {} episodes {} wins {} upper95 {:.3e}\n",
                if l == self.tutorial_level { " (tutorial)" } else { "" },
                self.steps_per_level[i],
                self.episodes[i],
                self.wins[i],
                self.win_rate_upper_bound(l)
            ));
        }
        for c in &self.crashes {
            let trace: Vec<String> = c.trace.iter().map(|a| a.to_string()).collect();
            out.push_str(&format!(
                "crash seed {} level {} trace [{}]: {}\n",
                c.seed,
                c.level,
                trace.join(" "),
                c.message
            ));
        }
        for m in &self.malformed {
            out.push_str(&format!("malformed seed {} level {} step {}: {}\n", m.seed, m.level, m.step, m.error));
        }
        for m in &self.inconsistencies {
            out.push_str(&format!("inconsistent seed {} level {} step {}: {}\n", m.seed, m.level, m.step, m.message));
        }
        out
    }
}

#[derive(Default)]
struct JobResult {
    wins: Vec<u64>,
    episodes: Vec<u64>,
    steps: Vec<u64>,
    crashes: Vec<Crash>,
    malformed: Vec<MalformedFrame>,
    inconsistencies: Vec<Inconsistency>,
}

pub fn run_regime(env: Arc<dyn Environment>, config: &RegimeConfig) -> Result<RegimeReport, ValidationError> {
    config.validate()?;
    let spec = env.spec().clone();
    let n = spec.level_count;
    let jobs: Vec<(u64, Vec<(u32, u64)>)> = config
        .seeds
        .iter()
        .flat_map(|&seed| {
            if config.per_level {
                (1..=n).map(|l| (seed, vec![(l, config.step_budget)])).collect::<Vec<_>>()
            } else {
                let share = config.step_budget / n as u64;
                let extra = config.step_budget % n as u64;
                let plan = (1..=n).map(|l| (l, share + u64::from(l == 1) * extra)).collect();
                vec![(seed, plan)]
            }
        })
        .collect();

    let started = Instant::now();
    let sweep = config.regime == Regime::Sweep1M;
    let results: Vec<JobResult> = jobs
        .par_iter()
        .map(|(seed, plan)| {
            let mut r = JobResult {
                wins: vec![0; n as usize],
                episodes: vec![0; n as usize],
                steps: vec![0; n as usize],
                ..JobResult::default()
            };
            for &(level, budget) in plan {
                play_level(&env, *seed, level, budget, sweep, &mut r);
            }
            r
        })
        .collect();
    let elapsed = started.elapsed();

    let mut report = RegimeReport {
        game_id: spec.game_id.to_string(),
        regime: config.regime,
        tutorial_level: spec.tutorial_level,
        wins: vec![0; n as usize],
        episodes: vec![0; n as usize],
        steps_per_level: vec![0; n as usize],
        crashes: Vec::new(),
        malformed: Vec::new(),
        inconsistencies: Vec::new(),
        steps: 0,
        elapsed,
        steps_per_second: 0.0,
        pass: false,
    };
    for r in results {
        for i in 0..n as usize {
            report.wins[i] += r.wins[i];
            report.episodes[i] += r.episodes[i];
            report.steps_per_level[i] += r.steps[i];
        }
        report.crashes.extend(r.crashes);
        report.malformed.extend(r.malformed);
        report.inconsistencies.extend(r.inconsistencies);
    }
    report.steps = report.steps_per_level.iter().sum();
    report.steps_per_second = report.steps as f64 / elapsed.as_secs_f64().max(1e-9);
    let clean = report.crashes.is_empty() && report.malformed.is_empty() && report.inconsistencies.is_empty();
    report.pass = clean && (sweep || report.won_levels().is_empty());
    Ok(report)
}

fn policy_rng(seed: u64, level: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(level as u64);
    rng
}

fn random_action(rng: &mut ChaCha8Rng, kinds: &[ActionKind]) -> Action {
    match kinds[rng.random_range(0..kinds.len())] {
        ActionKind::Select => Action::Select {
            x: rng.random_range(0..GRID_SIZE as u8),
            y: rng.random_range(0..GRID_SIZE as u8),
        },
        k => Action::from_kind(k).expect("key action"),
    }
}

fn play_level(env: &Arc<dyn Environment>, seed: u64, level: u32, budget: u64, sweep: bool, r: &mut JobResult) {
    let i = level as usize - 1;
    let kinds: Vec<ActionKind> = env.spec().action_set.kinds().collect();
    let mut rng = policy_rng(seed, level);
    let open = || Session::open_at_level(env.clone(), seed, level).expect("level in range");
    let mut session = open();
    let mut episode: Vec<Action> = Vec::new();
    r.episodes[i] += 1;
    let mut done = 0u64;
    while done < budget {
        let action = random_action(&mut rng, &kinds);
        episode.push(action);
        let result = catch_unwind(AssertUnwindSafe(|| session.act(action)));
        done += 1;
        r.steps[i] += 1;
        let flags = match result {
            Ok(Ok(flags)) => flags,
            Ok(Err(e)) => {
                r.inconsistencies.push(Inconsistency {
                    seed,
                    level,
                    step: done,
                    message: format!("engine rejected {action}: {e}"),
                });
                return;
            }
            Err(payload) => {
                r.crashes.push(Crash {
                    seed,
                    level,
                    trace: minimize_crash(env, seed, level, &episode),
                    message: panic_message(payload.as_ref()),
                });
                return;
            }
        };

        let frames = session.frames().frames();
        let to_check: &[Frame] = if sweep { frames } else { &frames[frames.len() - 1..] };
        for f in to_check {
            if let Err(error) = f.validate() {
                r.malformed.push(MalformedFrame { seed, level, step: done, error });
                return;
            }
        }
        if sweep && done.is_multiple_of(CONSISTENCY_PERIOD) {
            if let Some(message) = check_consistency(&session) {
                r.inconsistencies.push(Inconsistency { seed, level, step: done, message });
                return;
            }
        }

        let episode_over = flags.level_completed || flags.game_over || episode.len() as u64 >= EPISODE_CAP;
        if flags.level_completed {
            r.wins[i] += 1;
        }
        if episode_over && done < budget {
            session = open();
            episode.clear();
            r.episodes[i] += 1;
        }
    }
}

/// Re-derives the session's digest and settled frame from its level state
/// and checks that reading them twice changes nothing.
fn check_consistency(session: &Session) -> Option<String> {
    let before = session.state_digest();
    let mut frame = Frame::filled(0);
    session.level_state().render(&mut frame);
    if session.status() == Status::InProgress && &frame != session.frames().last() {
        return Some("settled frame differs from a fresh render of the state".into());
    }
    let mut buf = Vec::new();
    session.level_state().encode(&mut buf);
    let recomputed = state_digest(session.level(), session.spec().state_version, &buf, &frame);
    if recomputed != before {
        return Some(format!("digest {before} does not match recomputed {recomputed}"));
    }
    if session.state_digest() != before {
        return Some("digest changed without an action".into());
    }
    None
}

/// Shortest suffix of `episode` that still panics when replayed from the
/// level's reset state.
fn minimize_crash(env: &Arc<dyn Environment>, seed: u64, level: u32, episode: &[Action]) -> Vec<Action> {
    for start in (0..episode.len()).rev() {
        let suffix = &episode[start..];
        if panics(env, seed, level, suffix) {
            return suffix.to_vec();
        }
    }
    episode.to_vec()
}

fn panics(env: &Arc<dyn Environment>, seed: u64, level: u32, trace: &[Action]) -> bool {
    let Ok(mut session) = Session::open_at_level(env.clone(), seed, level) else {
        return false;
    };
    catch_unwind(AssertUnwindSafe(|| {
        for &a in trace {
            if session.act(a).is_err() {
                break;
            }
        }
    }))
    .is_err()
}

fn panic_message(payload: &(dyn std::any::Any + Send)) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        s.to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "environment panicked".to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::fixtures::Crashy;
    use crate::envs::Tiny;

    #[test]
    fn config_invariants() {
        assert!(RegimeConfig::deep(vec![1]).validate().is_ok());
        let mut c = RegimeConfig::sanity(vec![1]);
        c.step_budget = 50_001;
        assert!(c.validate().is_err());
        assert!(RegimeConfig::sweep(vec![]).validate().is_err());
    }

    #[test]
    fn crash_is_reported_with_one_action_trace() {
        let report = run_regime(Arc::new(Crashy::new()), &RegimeConfig::sanity(vec![3])).unwrap();
        assert!(!report.pass);
        assert_eq!(report.crashes.len(), 1);
        assert_eq!(report.crashes[0].trace, vec![Action::Select { x: 0, y: 0 }]);
    }

    #[test]
    fn tutorial_wins_are_tolerated() {
        let mut cfg = RegimeConfig::sanity(vec![1, 2]);
        cfg.step_budget = 5_000;
        let report = run_regime(Arc::new(Tiny::new()), &cfg).unwrap();
        assert!(report.wins[0] > 0);
        // Level 2 of tiny is easy on purpose, so it is won and fails.
        assert!(report.wins[1] > 0);
        assert_eq!(report.won_levels(), vec![2]);
        assert!(!report.pass);
        assert_eq!(report.steps, 2 * 2 * 5_000);
    }

    #[test]
    fn sweep_ignores_wins() {
        let mut cfg = RegimeConfig::sweep(vec![5]);
        cfg.step_budget = DEEP_STEPS;
        cfg.seeds = vec![5];
        let report = run_regime(Arc::new(Tiny::new()), &cfg).unwrap();
        assert!(report.pass, "{}", report.to_text());
        assert_eq!(report.steps, DEEP_STEPS);
    }
}
