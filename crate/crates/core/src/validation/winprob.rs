//! Probability that the uniform random policy wins a level.
//!
//! On a state graph this is an absorbing Markov chain: win terminals are
//! worth 1, GAME_OVER 0, and every other state the weighted mean of its
//! successors (self-edges included). Unexplored frontier nodes are fixed at
//! 0 for a lower bound and at 1 for an upper bound.
//!
//! The system is solved by two Gauss-Seidel sweeps run side by side, one
//! rising from 0 and one falling from 1. Both are monotone, so at every
//! sweep they bracket the solution; iteration stops once the bracket is
//! narrower than the tolerance everywhere.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{Beta, ContinuousCDF};

use crate::action::{Action, ActionKind};
use crate::env::{EnvRng, Environment, LevelEvent};
use crate::frame::GRID_SIZE;
use crate::validation::graph::StateGraph;
use crate::validation::ValidationError;

pub const SOLVE_TOLERANCE: f64 = 1e-12;
pub const MAX_SWEEPS: usize = 10_000;
/// Largest system handed to the dense fallback.
pub const DENSE_LIMIT: usize = 5_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ExactSolve,
    FrontierBounds,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WinProbability {
    pub lower: f64,
    pub upper: f64,
    pub exact: Option<f64>,
    pub method: Method,
}

impl WinProbability {
    fn exact(p: f64) -> Self {
        Self {
            lower: p,
            upper: p,
            exact: Some(p),
            method: Method::ExactSolve,
        }
    }
}

/// Exact solve on a fully explored graph, frontier bounds otherwise.
pub fn estimate_win_probability(graph: &StateGraph) -> Result<WinProbability, ValidationError> {
    if graph.nodes.is_empty() {
        return Err(ValidationError::EmptyGraph);
    }
    if graph.stats.fully_explored {
        return solve(graph, 0.0).map(WinProbability::exact);
    }
    let lower = solve(graph, 0.0)?;
    let upper = solve(graph, 1.0)?;
    Ok(WinProbability {
        lower,
        upper: upper.max(lower),
        exact: None,
        method: Method::FrontierBounds,
    })
}

/// A rigorous upper bound on the win probability from the reset state,
/// cheaper than a full solve: the falling sweep stops as soon as it drops
/// below `target` or converges. Frontier nodes count as wins.
pub fn win_probability_upper_bound(graph: &StateGraph, target: f64, max_sweeps: usize) -> f64 {
    let Some(system) = System::build(graph, 1.0) else {
        return 0.0;
    };
    let mut lo = vec![0.0; system.len()];
    let mut hi = vec![1.0; system.len()];
    for _ in 0..max_sweeps {
        let gap = system.sweep(&mut lo, &mut hi);
        if hi[system.root] < target || gap <= SOLVE_TOLERANCE {
            break;
        }
    }
    hi[system.root]
}

/// Reset-state win probability with frontier nodes fixed at
/// `frontier_value`.
fn solve(graph: &StateGraph, frontier_value: f64) -> Result<f64, ValidationError> {
    let Some(system) = System::build(graph, frontier_value) else {
        return Ok(0.0);
    };
    if let Some(p) = system.root_fixed {
        return Ok(p);
    }
    let mut lo = vec![0.0; system.len()];
    let mut hi = vec![1.0; system.len()];
    for _ in 0..MAX_SWEEPS {
        if system.sweep(&mut lo, &mut hi) <= SOLVE_TOLERANCE {
            return Ok(0.5 * (lo[system.root] + hi[system.root]));
        }
    }
    if system.len() <= DENSE_LIMIT {
        return system.dense_solve().ok_or(ValidationError::SingularSystem { unknowns: system.len() });
    }
    Err(ValidationError::SingularSystem { unknowns: system.len() })
}

/// `x[u] = sum_k coef[k] * x[col[k]] + rhs[u]` over the unknowns that can
/// reach a positive fixed value. Everything else is exactly 0.
struct System {
    start: Vec<usize>,
    col: Vec<usize>,
    coef: Vec<f64>,
    rhs: Vec<f64>,
    root: usize,
    root_fixed: Option<f64>,
}

impl System {
    fn build(graph: &StateGraph, frontier_value: f64) -> Option<Self> {
        let n = graph.nodes.len();
        let fixed = |i: usize| -> Option<f64> {
            let node = &graph.nodes[i];
            match node.terminal {
                Some(t) if t.is_win() => Some(1.0),
                Some(_) => Some(0.0),
                None if !node.expanded => Some(frontier_value),
                None => None,
            }
        };
        // Backward reachability from positive fixed nodes.
        let mut preds: Vec<Vec<u32>> = vec![Vec::new(); n];
        for e in &graph.edges {
            if e.src != e.dst {
                preds[e.dst as usize].push(e.src);
            }
        }
        let mut live = vec![false; n];
        let mut work: Vec<usize> = (0..n).filter(|&i| fixed(i).is_some_and(|v| v > 0.0)).collect();
        for &i in &work {
            live[i] = true;
        }
        while let Some(v) = work.pop() {
            for &u in &preds[v] {
                let u = u as usize;
                if !live[u] && fixed(u).is_none() {
                    live[u] = true;
                    work.push(u);
                }
            }
        }
        if !live[0] {
            return None;
        }
        if let Some(v) = fixed(0) {
            return Some(Self {
                start: vec![0],
                col: Vec::new(),
                coef: Vec::new(),
                rhs: Vec::new(),
                root: 0,
                root_fixed: Some(v),
            });
        }
        // Deepest nodes first: values flow back from the terminals.
        let mut order: Vec<usize> = (0..n).filter(|&i| live[i] && fixed(i).is_none()).collect();
        order.sort_by_key(|&i| std::cmp::Reverse(graph.nodes[i].depth));
        let mut slot = vec![usize::MAX; n];
        for (k, &i) in order.iter().enumerate() {
            slot[i] = k;
        }
        let mut start = vec![0];
        let mut col = Vec::new();
        let mut coef = Vec::new();
        let mut rhs = Vec::with_capacity(order.len());
        for &i in &order {
            let edges = graph.out_edges(i);
            let total: f64 = edges.iter().map(|e| e.weight as f64).sum();
            let own: f64 = edges.iter().filter(|e| e.dst as usize == i).map(|e| e.weight as f64).sum();
            let denom = total - own;
            let mut b = 0.0;
            for e in edges.iter().filter(|e| e.dst as usize != i) {
                let j = e.dst as usize;
                let w = e.weight as f64 / denom;
                if let Some(v) = fixed(j) {
                    b += w * v;
                } else if live[j] {
                    col.push(slot[j]);
                    coef.push(w);
                }
            }
            rhs.push(b);
            start.push(col.len());
        }
        Some(Self {
            start,
            col,
            coef,
            rhs,
            root: slot[0],
            root_fixed: None,
        })
    }

    fn len(&self) -> usize {
        self.rhs.len()
    }

    /// One Gauss-Seidel pass over both iterates; returns the widest gap.
    fn sweep(&self, lo: &mut [f64], hi: &mut [f64]) -> f64 {
        let mut gap: f64 = 0.0;
        for u in 0..self.len() {
            let (mut a, mut b) = (self.rhs[u], self.rhs[u]);
            for k in self.start[u]..self.start[u + 1] {
                a += self.coef[k] * lo[self.col[k]];
                b += self.coef[k] * hi[self.col[k]];
            }
            lo[u] = a.max(lo[u]);
            hi[u] = b.min(hi[u]);
            gap = gap.max(hi[u] - lo[u]);
        }
        gap
    }

    /// Dense Gaussian elimination with partial pivoting on `(I - A) x = b`.
    fn dense_solve(&self) -> Option<f64> {
        let m = self.len();
        let mut a = vec![0.0f64; m * m];
        let mut b = self.rhs.clone();
        for u in 0..m {
            a[u * m + u] += 1.0;
            for k in self.start[u]..self.start[u + 1] {
                a[u * m + self.col[k]] -= self.coef[k];
            }
        }
        for k in 0..m {
            let p = (k..m).max_by(|&x, &y| a[x * m + k].abs().total_cmp(&a[y * m + k].abs()))?;
            if a[p * m + k].abs() < 1e-300 {
                return None;
            }
            if p != k {
                for c in 0..m {
                    a.swap(k * m + c, p * m + c);
                }
                b.swap(k, p);
            }
            let pivot = a[k * m + k];
            for r in k + 1..m {
                let f = a[r * m + k] / pivot;
                if f != 0.0 {
                    for c in k..m {
                        a[r * m + c] -= f * a[k * m + c];
                    }
                    b[r] -= f * b[k];
                }
            }
        }
        let mut x = vec![0.0; m];
        for k in (0..m).rev() {
            let mut s = b[k];
            for c in k + 1..m {
                s -= a[k * m + c] * x[c];
            }
            x[k] = s / a[k * m + k];
        }
        let v = x[self.root];
        v.is_finite().then_some(v.clamp(0.0, 1.0))
    }
}

/// Outcome of a batch of random rollouts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub rollouts: u64,
    pub wins: u64,
    /// Rollouts cut off by the step cap without reaching a terminal.
    pub truncated: u64,
    pub rate: f64,
    /// Two-sided Clopper-Pearson interval at `confidence`.
    pub lower: f64,
    pub upper: f64,
    pub confidence: f64,
}

impl MonteCarloEstimate {
    pub fn contains(&self, p: f64) -> bool {
        self.lower <= p && p <= self.upper
    }

    pub fn as_win_probability(&self) -> WinProbability {
        WinProbability {
            lower: self.lower,
            upper: self.upper,
            exact: None,
            method: Method::MonteCarlo,
        }
    }
}

const ROLLOUT_CHUNK: u64 = 4096;

/// Runs `rollouts` episodes of the uniform random policy over the state
/// actions of `level`, each from the reset state until a terminal or
/// `step_cap` steps. Deterministic in `seed` regardless of thread count.
pub fn monte_carlo(
    env: &dyn Environment,
    level: u32,
    rollouts: u64,
    seed: u64,
    step_cap: u64,
    confidence: f64,
) -> MonteCarloEstimate {
    let kinds: Vec<ActionKind> = env.spec().state_actions().kinds().collect();
    let reset = env.reset_state(level);
    let chunks = rollouts.div_ceil(ROLLOUT_CHUNK);
    let (wins, truncated) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let n = ROLLOUT_CHUNK.min(rollouts - c * ROLLOUT_CHUNK);
            let mut policy = ChaCha8Rng::seed_from_u64(seed ^ c.wrapping_mul(0x9e37_79b9_7f4a_7c15));
            let mut env_rng = EnvRng::seed_from_u64(seed.wrapping_add(c));
            let (mut wins, mut truncated) = (0u64, 0u64);
            for _ in 0..n {
                let mut state = reset.clone_box();
                let mut done = false;
                for _ in 0..step_cap {
                    let action = match kinds[policy.random_range(0..kinds.len())] {
                        ActionKind::Select => Action::Select {
                            x: policy.random_range(0..GRID_SIZE as u8),
                            y: policy.random_range(0..GRID_SIZE as u8),
                        },
                        k => Action::from_kind(k).expect("key action"),
                    };
                    match state.step(action, &mut env_rng).event {
                        LevelEvent::None => continue,
                        LevelEvent::Won => wins += 1,
                        LevelEvent::Lost => {}
                    }
                    done = true;
                    break;
                }
                if !done {
                    truncated += 1;
                }
            }
            (wins, truncated)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let (lower, upper) = clopper_pearson(wins, rollouts, confidence);
    MonteCarloEstimate {
        rollouts,
        wins,
        truncated,
        rate: if rollouts == 0 { 0.0 } else { wins as f64 / rollouts as f64 },
        lower,
        upper,
        confidence,
    }
}

/// Two-sided Clopper-Pearson interval for `k` successes in `n` trials.
pub fn clopper_pearson(k: u64, n: u64, confidence: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let alpha = 1.0 - confidence;
    let (kf, nf) = (k as f64, n as f64);
    let lower = if k == 0 {
        0.0
    } else {
        Beta::new(kf, nf - kf + 1.0).unwrap().inverse_cdf(alpha / 2.0)
    };
    let upper = if k == n {
        1.0
    } else {
        Beta::new(kf + 1.0, nf - kf).unwrap().inverse_cdf(1.0 - alpha / 2.0)
    };
    (lower, upper)
}

/// One-sided upper confidence bound on a rate after `n` trials without a
/// success: the largest `p` with `(1 - p)^n >= 1 - confidence`.
pub fn zero_win_upper_bound(n: u64, confidence: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    1.0 - (1.0 - confidence).powf(1.0 / n as f64)
}

/// One-sided upper confidence bound on a rate after `k` successes in `n`
/// trials.
pub fn one_sided_upper_bound(k: u64, n: u64, confidence: f64) -> f64 {
    if k == 0 {
        return zero_win_upper_bound(n, confidence);
    }
    if k >= n {
        return 1.0;
    }
    Beta::new(k as f64 + 1.0, (n - k) as f64).unwrap().inverse_cdf(confidence)
}
