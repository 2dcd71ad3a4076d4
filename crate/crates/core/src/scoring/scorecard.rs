//! Scorecards: per-level results joined with a baseline.
//!
//! File format:
//!
//! ```text
//! gridbench-scorecard 1
//! environments 1
//! total 0.4
//! environment smp1 levels 6 score 0.4 cutoff no baseline <sha256 | ->
//! level 1 h 9 actions 12 score 0.5625
//! level 2 h 30 actions unsolved score 0
//! ...
//! ```
//!
//! Scores are written in shortest round-trip form, so parsing a scorecard
//! gives back the same numbers.

use std::fmt::Write as _;

use crate::recording::Recording;
use crate::scoring::baseline::HumanBaseline;
use crate::scoring::{cutoff_budget, environment_score, level_efficiency, total_score, LevelActions, LevelResult, ScoringError};

pub const SCORECARD_HEADER: &str = "gridbench-scorecard 1";

#[derive(Debug, Clone, PartialEq)]
pub struct LevelScore {
    pub level: u32,
    pub h: u64,
    pub actions: LevelActions,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentScorecard {
    pub game_id: String,
    pub baseline_sha256: Option<String>,
    pub levels: Vec<LevelScore>,
    pub score: f64,
    /// The run hit the action cutoff on some level.
    pub cut_off: bool,
}

impl EnvironmentScorecard {
    pub fn level_results(&self) -> Vec<LevelResult> {
        self.levels
            .iter()
            .map(|l| LevelResult {
                game_id: self.game_id.clone(),
                level: l.level,
                actions: l.actions,
                elapsed_s: None,
            })
            .collect()
    }
}

/// Scores a run from its per-level action counts. `counts[i]` is the actions
/// spent on level `i + 1` and the first `completed` levels were won.
///
/// A level whose count exceeds the cutoff is unsolved even if it was won
/// later, and the run ends there: every later level is unsolved as well.
pub fn score_counts(
    counts: &[u64],
    completed: u32,
    baseline: &HumanBaseline,
) -> Result<EnvironmentScorecard, ScoringError> {
    let n = baseline.level_count();
    let mut levels = Vec::with_capacity(n);
    let mut cut_off = false;
    for i in 0..n {
        let level = i as u32 + 1;
        let h = baseline.levels[i].h;
        let a = counts.get(i).copied().unwrap_or(0);
        let actions = if cut_off || a > cutoff_budget(h) {
            cut_off = true;
            LevelActions::Unsolved
        } else if level <= completed {
            LevelActions::Solved(a)
        } else {
            // Reaching the budget without a win ends the run.
            cut_off |= a >= cutoff_budget(h);
            LevelActions::Unsolved
        };
        levels.push(LevelScore {
            level,
            h,
            actions,
            score: level_efficiency(h, actions)?,
        });
    }
    let scores: Vec<f64> = levels.iter().map(|l| l.score).collect();
    Ok(EnvironmentScorecard {
        game_id: baseline.game_id.clone(),
        baseline_sha256: Some(baseline.sha256()),
        score: environment_score(&scores, n)?,
        levels,
        cut_off,
    })
}

pub fn score_recording(rec: &Recording, baseline: &HumanBaseline) -> Result<EnvironmentScorecard, ScoringError> {
    if rec.game_id.as_str() != baseline.game_id {
        return Err(ScoringError::GameMismatch {
            recording: rec.game_id.to_string(),
            baseline: baseline.game_id.clone(),
        });
    }
    score_counts(&rec.level_counts(), rec.levels_completed(), baseline)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scorecard {
    pub environments: Vec<EnvironmentScorecard>,
    pub total: f64,
}

impl Scorecard {
    pub fn new(environments: Vec<EnvironmentScorecard>) -> Result<Self, ScoringError> {
        let scores: Vec<f64> = environments.iter().map(|e| e.score).collect();
        let total = total_score(&scores)?;
        Ok(Self { environments, total })
    }

    pub fn dataset_size(&self) -> usize {
        self.environments.len()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{SCORECARD_HEADER}");
        let _ = writeln!(out, "environments {}", self.environments.len());
        let _ = writeln!(out, "total {}", self.total);
        for e in &self.environments {
            let _ = writeln!(
                out,
                "environment {} levels {} score {} cutoff {} baseline {}",
                e.game_id,
                e.levels.len(),
                e.score,
                if e.cut_off { "yes" } else { "no" },
                e.baseline_sha256.as_deref().unwrap_or("-")
            );
            for l in &e.levels {
                let _ = writeln!(out, "level {} h {} actions {} score {}", l.level, l.h, l.actions, l.score);
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, ScoringError> {
        let err = |line: usize, message: &str| ScoringError::Format {
            line,
            message: message.to_string(),
        };
        let lines: Vec<&str> = text.lines().collect();
        if lines.first() != Some(&SCORECARD_HEADER) {
            return Err(err(1, "missing scorecard header"));
        }
        let words = |i: usize| -> Vec<&str> { lines.get(i).map_or(Vec::new(), |l| l.split(' ').collect()) };
        let num = |s: &str, line: usize| s.parse::<f64>().map_err(|_| err(line, "bad number"));
        let w = words(1);
        let count: usize = match w.as_slice() {
            ["environments", c] => c.parse().map_err(|_| err(2, "bad environment count"))?,
            _ => return Err(err(2, "expected `environments <n>`")),
        };
        let total = match words(2).as_slice() {
            ["total", t] => num(t, 3)?,
            _ => return Err(err(3, "expected `total <score>`")),
        };
        let mut i = 3;
        let mut environments = Vec::with_capacity(count);
        for _ in 0..count {
            let (game_id, n, score, cut_off, sha) = match words(i).as_slice() {
                ["environment", g, "levels", n, "score", s, "cutoff", c @ ("yes" | "no"), "baseline", b] => (
                    g.to_string(),
                    n.parse::<usize>().map_err(|_| err(i + 1, "bad level count"))?,
                    num(s, i + 1)?,
                    *c == "yes",
                    (*b != "-").then(|| b.to_string()),
                ),
                _ => return Err(err(i + 1, "expected an environment record")),
            };
            i += 1;
            let mut levels = Vec::with_capacity(n);
            for _ in 0..n {
                let level = match words(i).as_slice() {
                    ["level", l, "h", h, "actions", a, "score", s] => LevelScore {
                        level: l.parse().map_err(|_| err(i + 1, "bad level"))?,
                        h: h.parse().map_err(|_| err(i + 1, "bad baseline"))?,
                        actions: match *a {
                            "unsolved" => LevelActions::Unsolved,
                            a => LevelActions::Solved(a.parse().map_err(|_| err(i + 1, "bad action count"))?),
                        },
                        score: num(s, i + 1)?,
                    },
                    _ => return Err(err(i + 1, "expected a level record")),
                };
                levels.push(level);
                i += 1;
            }
            environments.push(EnvironmentScorecard {
                game_id,
                baseline_sha256: sha,
                levels,
                score,
                cut_off,
            });
        }
        if i != lines.len() {
            return Err(err(i + 1, "unexpected trailing lines"));
        }
        Ok(Self { environments, total })
    }

    /// A fixed-width table, one row per environment plus a total row.
    pub fn to_table(&self) -> String {
        let max_levels = self.environments.iter().map(|e| e.levels.len()).max().unwrap_or(0);
        let mut out = String::new();
        let _ = write!(out, "{:<6}", "game");
        for l in 1..=max_levels {
            let _ = write!(out, " {:>12}", format!("L{l}"));
        }
        let _ = writeln!(out, " {:>7}", "score");
        for e in &self.environments {
            let _ = write!(out, "{:<6}", e.game_id);
            for l in 1..=max_levels {
                let cell = match e.levels.get(l - 1) {
                    Some(s) => match s.actions {
                        LevelActions::Solved(a) => format!("{}/{} {:>3.0}%", a, s.h, 100.0 * s.score),
                        LevelActions::Unsolved => "-".to_string(),
                    },
                    None => String::new(),
                };
                let _ = write!(out, " {cell:>12}");
            }
            let _ = writeln!(out, " {:>6.1}%", 100.0 * e.score);
        }
        let _ = writeln!(
            out,
            "{:<6} {:>w$} {:>6.1}%",
            "total",
            format!("{} env", self.environments.len()),
            100.0 * self.total,
            w = 13 * max_levels.max(1) - 1
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::baseline::LevelBaseline;

    fn baseline(hs: &[u64]) -> HumanBaseline {
        HumanBaseline {
            game_id: "test".into(),
            solvers: 2,
            levels: hs
                .iter()
                .map(|&h| LevelBaseline { h, best_first_run: h, optimal: h })
                .collect(),
        }
    }

    #[test]
    fn parity_scores_one() {
        let card = score_counts(&[10, 20, 30], 3, &baseline(&[10, 20, 30])).unwrap();
        assert_eq!(card.score, 1.0);
        assert!(!card.cut_off);
    }

    #[test]
    fn cutoff_ends_the_run() {
        // Level 1 won within budget, level 2 abandoned at 5h.
        let card = score_counts(&[12, 100], 1, &baseline(&[10, 20, 30])).unwrap();
        assert_eq!(card.levels[0].actions, LevelActions::Solved(12));
        assert_eq!(card.levels[1].actions, LevelActions::Unsolved);
        assert!(card.cut_off);
        // Won, but only after exceeding the budget.
        let card = score_counts(&[51, 20, 30], 3, &baseline(&[10, 20, 30])).unwrap();
        assert!(card.levels.iter().all(|l| l.actions == LevelActions::Unsolved));
        assert_eq!(card.score, 0.0);
        // Winning on the last allowed action still counts.
        let card = score_counts(&[50], 1, &baseline(&[10])).unwrap();
        assert_eq!(card.levels[0].score, 0.04);
    }

    #[test]
    fn text_round_trip() {
        let a = score_counts(&[12, 25], 2, &baseline(&[10, 20])).unwrap();
        let b = score_counts(&[7], 0, &baseline(&[10, 20])).unwrap();
        let card = Scorecard::new(vec![a, b]).unwrap();
        let text = card.to_text();
        let back = Scorecard::parse(&text).unwrap();
        assert_eq!(back.to_text(), text);
        assert_eq!(back.total, card.total);
        assert!(card.to_table().contains("total"));
    }
}
