//! Human baselines extracted from first-run attempts.
//!
//! File format:
//!
//! ```text
//! gridbench-baseline 1
//! game smp1
//! solvers 4
//! levels 6
//! level 1 h 9 best 7 optimal 7
//! ...
//! ```
//!
//! A baseline is a frozen artifact; scorecards cite it by the SHA-256 of
//! its text.

use std::collections::HashSet;
use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::recording::{Outcome, Recording};
use crate::scoring::{attempt_filter_recording, AttemptValidity, ScoringError};

pub const BASELINE_HEADER: &str = "gridbench-baseline 1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelBaseline {
    /// Second-smallest action count among participants who solved the level.
    pub h: u64,
    /// Smallest action count among participants who solved the level.
    pub best_first_run: u64,
    /// Action count of the authored optimal playthrough.
    pub optimal: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HumanBaseline {
    pub game_id: String,
    /// Participants who solved the whole environment.
    pub solvers: usize,
    pub levels: Vec<LevelBaseline>,
}

impl HumanBaseline {
    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    /// `h` for a 1-based level.
    pub fn h(&self, level: u32) -> u64 {
        self.levels[level as usize - 1].h
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{BASELINE_HEADER}");
        let _ = writeln!(out, "game {}", self.game_id);
        let _ = writeln!(out, "solvers {}", self.solvers);
        let _ = writeln!(out, "levels {}", self.levels.len());
        for (i, l) in self.levels.iter().enumerate() {
            let _ = writeln!(out, "level {} h {} best {} optimal {}", i + 1, l.h, l.best_first_run, l.optimal);
        }
        out
    }

    /// Hex SHA-256 of [`HumanBaseline::to_text`].
    pub fn sha256(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn parse(text: &str) -> Result<Self, ScoringError> {
        let err = |line: usize, message: &str| ScoringError::Format {
            line,
            message: message.to_string(),
        };
        let lines: Vec<&str> = text.lines().collect();
        if lines.first() != Some(&BASELINE_HEADER) {
            return Err(err(1, "missing baseline header"));
        }
        let value = |i: usize, key: &str| -> Result<&str, ScoringError> {
            lines
                .get(i)
                .and_then(|l| l.strip_prefix(key))
                .and_then(|r| r.strip_prefix(' '))
                .ok_or_else(|| err(i + 1, &format!("expected `{key} <value>`")))
        };
        let game_id = value(1, "game")?.to_string();
        let solvers = value(2, "solvers")?.parse().map_err(|_| err(3, "bad solver count"))?;
        let n: usize = value(3, "levels")?.parse().map_err(|_| err(4, "bad level count"))?;
        if n == 0 {
            return Err(err(4, "at least one level"));
        }
        if lines.len() != 4 + n {
            return Err(err(lines.len().min(4 + n) + 1, "level records do not match the level count"));
        }
        let mut levels = Vec::with_capacity(n);
        for i in 0..n {
            let line = i + 5;
            let parts: Vec<&str> = lines[4 + i].split(' ').collect();
            let shape = ["level", "", "h", "", "best", "", "optimal", ""];
            if parts.len() != 8 || (0..8).step_by(2).any(|k| parts[k] != shape[k]) {
                return Err(err(line, "expected `level <l> h <n> best <n> optimal <n>`"));
            }
            let num = |k: usize| parts[k].parse::<u64>().map_err(|_| err(line, "bad number"));
            if num(1)? != (i + 1) as u64 {
                return Err(err(line, "levels must be listed in order"));
            }
            let l = LevelBaseline {
                h: num(3)?,
                best_first_run: num(5)?,
                optimal: num(7)?,
            };
            if l.optimal < 1 || l.optimal > l.best_first_run || l.best_first_run > l.h {
                return Err(err(line, "expected 1 <= optimal <= best <= h"));
            }
            levels.push(l);
        }
        Ok(Self { game_id, solvers, levels })
    }
}

/// Builds a baseline from first-run human attempts.
///
/// Attempts for other games, non-human attempts, invalid attempts and
/// repeat attempts by the same actor are ignored. At least two remaining
/// attempts must solve the whole environment. Per level, `h` is the
/// second-smallest action count among attempts that solved that level
/// (ties resolve to the tied value) and `best_first_run` the smallest.
pub fn extract_baseline(attempts: &[Recording], game_id: &str, optimal: &Recording) -> Result<HumanBaseline, ScoringError> {
    let n = optimal.levels_entered as usize;
    if optimal.outcome != Outcome::Win || optimal.game_id.as_str() != game_id {
        return Err(ScoringError::UnsolvedReference(game_id.to_string()));
    }
    let mut seen = HashSet::new();
    let first_runs: Vec<&Recording> = attempts
        .iter()
        .filter(|r| r.game_id.as_str() == game_id && r.source == crate::recording::Source::Human)
        .filter(|r| seen.insert(r.actor.clone()))
        .filter(|r| attempt_filter_recording(r) == AttemptValidity::Valid)
        .collect();
    let solvers = first_runs.iter().filter(|r| r.outcome == Outcome::Win).count();
    if solvers < 2 {
        return Err(ScoringError::InsufficientSolvers {
            game_id: game_id.to_string(),
            solvers,
        });
    }
    let reference = optimal.level_counts();
    let mut levels = Vec::with_capacity(n);
    for level in 1..=n {
        let mut counts: Vec<u64> = first_runs
            .iter()
            .filter(|r| r.levels_completed() as usize >= level)
            .map(|r| r.level_counts()[level - 1])
            .collect();
        counts.sort_unstable();
        let l = LevelBaseline {
            h: counts[1],
            best_first_run: counts[0],
            optimal: reference[level - 1],
        };
        if l.optimal > l.best_first_run {
            return Err(ScoringError::InconsistentReference {
                level: level as u32,
                optimal: l.optimal,
                best: l.best_first_run,
            });
        }
        levels.push(l);
    }
    Ok(HumanBaseline {
        game_id: game_id.to_string(),
        solvers,
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::Action;
    use crate::digest::StateDigest;
    use crate::env::GameId;
    use crate::recording::{RecordedAction, Source};

    /// A synthetic recording with the given per-level counts, spread over
    /// `minutes`. Digests are irrelevant to baseline extraction.
    fn attempt(actor: &str, counts: &[u64], win: bool, minutes: u64) -> Recording {
        let total: u64 = counts.iter().sum();
        let mut actions = Vec::new();
        for (i, &c) in counts.iter().enumerate() {
            for _ in 0..c {
                let k = actions.len() as u64;
                actions.push(RecordedAction {
                    action: Action::Key1,
                    level: i as u32 + 1,
                    digest: StateDigest(0),
                    elapsed_ms: Some((k + 1) * minutes * 60_000 / total),
                });
            }
        }
        Recording {
            game_id: GameId::new("test").unwrap(),
            seed: 0,
            source: Source::Human,
            actor: actor.into(),
            outcome: if win { Outcome::Win } else { Outcome::Loss },
            levels_entered: counts.len() as u32,
            actions,
        }
    }

    fn optimal(counts: &[u64]) -> Recording {
        let mut r = attempt("author", counts, true, 1);
        r.source = Source::Authored;
        r
    }

    #[test]
    fn second_best_per_level() {
        let a = attempt("A", &[12, 20], true, 10);
        let b = attempt("B", &[15, 18], true, 10);
        let c = attempt("C", &[30, 40], true, 10);
        let base = extract_baseline(&[a, b, c], "test", &optimal(&[10, 16])).unwrap();
        assert_eq!(base.levels[0], LevelBaseline { h: 15, best_first_run: 12, optimal: 10 });
        assert_eq!(base.levels[1], LevelBaseline { h: 20, best_first_run: 18, optimal: 16 });
        assert_eq!(base.solvers, 3);
    }

    #[test]
    fn level_solvers_count_even_without_full_solve() {
        let a = attempt("A", &[12, 20], true, 10);
        let b = attempt("B", &[15, 18], true, 10);
        // Solved level 1 only, quickly.
        let c = attempt("C", &[11, 40], false, 10);
        let base = extract_baseline(&[a, b, c], "test", &optimal(&[10, 16])).unwrap();
        assert_eq!(base.levels[0].h, 12);
        assert_eq!(base.levels[0].best_first_run, 11);
        assert_eq!(base.levels[1].h, 20);
    }

    #[test]
    fn ties_and_filters() {
        let a = attempt("A", &[16, 20], true, 10);
        let b = attempt("B", &[16, 20], true, 10);
        let too_long = attempt("C", &[12, 12], true, 31);
        let repeat = attempt("A", &[14, 14], true, 10);
        let base = extract_baseline(&[a, b, too_long, repeat], "test", &optimal(&[10, 16])).unwrap();
        assert_eq!(base.levels[0].h, 16);
        assert_eq!(base.levels[0].best_first_run, 16);
    }

    #[test]
    fn needs_two_solvers() {
        let a = attempt("A", &[16, 20], true, 10);
        let b = attempt("B", &[16, 20], false, 10);
        assert_eq!(
            extract_baseline(&[a, b], "test", &optimal(&[10, 16])),
            Err(ScoringError::InsufficientSolvers { game_id: "test".into(), solvers: 1 })
        );
    }

    #[test]
    fn text_round_trip_and_hash() {
        let a = attempt("A", &[12, 20], true, 10);
        let b = attempt("B", &[15, 18], true, 10);
        let base = extract_baseline(&[a, b], "test", &optimal(&[10, 16])).unwrap();
        let text = base.to_text();
        assert_eq!(HumanBaseline::parse(&text).unwrap(), base);
        assert_eq!(base.sha256().len(), 64);
        assert!(HumanBaseline::parse(&text.replace("best 12", "best 99")).is_err());
    }
}
