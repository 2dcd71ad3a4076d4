//! Exhaustive enumeration of a level, for cross-checking the graph builder.
//!
//! This deliberately shares nothing with `validation::graph` beyond the
//! environment itself: states are keyed by their full canonical bytes rather
//! than a 64-bit digest, traversal is depth-first, Select is tried on all
//! 4096 cells instead of the environment's declared classes, and the win
//! probability is solved exactly over the rationals.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use thiserror::Error;

use crate::action::{Action, ActionKind};
use crate::digest::{canonical_bytes, state_digest, StateDigest};
use crate::env::{EnvRng, Environment, LevelEvent, LevelState};
use crate::frame::{Frame, CELL_COUNT, GRID_SIZE};
use crate::validation::Terminal;

/// Largest state space the oracle will enumerate.
pub const ORACLE_STATE_CAP: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("level {level} has more than {cap} reachable states")]
    StateSpaceTooLarge { level: u32, cap: usize },
    #[error("level {level} is outside 1..={level_count}")]
    LevelOutOfRange { level: u32, level_count: u32 },
}

#[derive(Debug, Clone)]
pub struct OracleReport {
    pub level: u32,
    pub node_count: usize,
    /// One edge per (state, key action), plus one per distinct Select
    /// successor of a state.
    pub edge_count: usize,
    pub terminals: BTreeMap<StateDigest, Terminal>,
    pub digests: Vec<StateDigest>,
    /// Exact probability that the uniform random policy wins from reset.
    pub p_win: BigRational,
}

impl OracleReport {
    pub fn p_win_f64(&self) -> f64 {
        self.p_win.to_f64().unwrap_or(f64::NAN)
    }
}

struct Node {
    terminal: Option<Terminal>,
    /// (successor, weight in 1/4096ths of an action kind)
    out: Vec<(usize, u64)>,
}

pub fn oracle_enumerate(env: &dyn Environment, level: u32) -> Result<OracleReport, OracleError> {
    oracle_enumerate_capped(env, level, ORACLE_STATE_CAP)
}

pub fn oracle_enumerate_capped(env: &dyn Environment, level: u32, cap: usize) -> Result<OracleReport, OracleError> {
    let spec = env.spec().clone();
    if level == 0 || level > spec.level_count {
        return Err(OracleError::LevelOutOfRange {
            level,
            level_count: spec.level_count,
        });
    }
    let kinds: Vec<ActionKind> = spec.state_actions().kinds().collect();
    let version = spec.state_version;

    let mut frame = Frame::filled(0);
    let mut enc = Vec::new();
    let mut key_buf = Vec::new();
    let mut key_of = |st: &dyn LevelState, frame: &mut Frame| -> Vec<u8> {
        st.render(frame);
        enc.clear();
        st.encode(&mut enc);
        canonical_bytes(&mut key_buf, level, version, &enc, frame);
        key_buf.clone()
    };

    let mut index: HashMap<Vec<u8>, usize> = HashMap::new();
    let mut nodes: Vec<Node> = Vec::new();
    let mut keys: Vec<Vec<u8>> = Vec::new();
    let mut stack: Vec<(usize, Box<dyn LevelState>)> = Vec::new();

    let root = env.reset_state(level);
    let root_key = key_of(root.as_ref(), &mut frame);
    index.insert(root_key.clone(), 0);
    keys.push(root_key);
    nodes.push(Node { terminal: None, out: Vec::new() });
    stack.push((0, root));

    while let Some((id, state)) = stack.pop() {
        let mut actions: Vec<(Action, u64)> = Vec::new();
        for &kind in &kinds {
            match Action::from_kind(kind) {
                Some(a) => actions.push((a, CELL_COUNT as u64)),
                None => {
                    for y in 0..GRID_SIZE as u8 {
                        for x in 0..GRID_SIZE as u8 {
                            actions.push((Action::Select { x, y }, 1));
                        }
                    }
                }
            }
        }
        let mut out: BTreeMap<(bool, usize), u64> = BTreeMap::new();
        for (action, weight) in actions {
            let mut next = state.clone_box();
            let mut rng = EnvRng::seed_from_u64(0);
            let outcome = next.step(action, &mut rng);
            let terminal = match outcome.event {
                LevelEvent::None => None,
                LevelEvent::Lost => Some(Terminal::GameOver),
                LevelEvent::Won if level == spec.level_count => Some(Terminal::EnvWin),
                LevelEvent::Won => Some(Terminal::LevelWin),
            };
            let key = key_of(next.as_ref(), &mut frame);
            let succ = match index.get(&key) {
                Some(&s) => s,
                None => {
                    let s = nodes.len();
                    if s >= cap {
                        return Err(OracleError::StateSpaceTooLarge { level, cap });
                    }
                    index.insert(key.clone(), s);
                    keys.push(key);
                    nodes.push(Node { terminal, out: Vec::new() });
                    if terminal.is_none() {
                        stack.push((s, next));
                    }
                    s
                }
            };
            let is_select = matches!(action, Action::Select { .. });
            *out.entry((is_select, succ)).or_insert(0) += weight;
            if !is_select {
                // Key edges are never merged, even when they share a successor.
                let w = out.remove(&(false, succ)).unwrap();
                nodes[id].out.push((succ, w));
            }
        }
        nodes[id].out.extend(out.into_iter().map(|((_, s), w)| (s, w)));
    }

    let edge_count = nodes.iter().map(|n| n.out.len()).sum();
    let digests: Vec<StateDigest> = keys.iter().map(|k| digest_of_key(k)).collect();
    let terminals = nodes
        .iter()
        .enumerate()
        .filter_map(|(i, n)| n.terminal.map(|t| (digests[i], t)))
        .collect();
    let p_win = solve_exact(&nodes);
    Ok(OracleReport {
        level,
        node_count: nodes.len(),
        edge_count,
        terminals,
        digests,
        p_win,
    })
}

fn digest_of_key(key: &[u8]) -> StateDigest {
    // Layout: tag(4) level(4) version(2) len(4) state(len) frame(4096)
    let level = u32::from_le_bytes(key[4..8].try_into().unwrap());
    let version = u16::from_le_bytes(key[8..10].try_into().unwrap());
    let len = u32::from_le_bytes(key[10..14].try_into().unwrap()) as usize;
    let state = &key[14..14 + len];
    let frame = Frame::from_cells(&key[14 + len..]).expect("canonical frame");
    state_digest(level, version, state, &frame)
}

/// Solves `p(s) = sum_a w(s,a) p(next(s,a)) / sum_a w(s,a)` with wins at 1
/// and losses at 0, by Gaussian elimination over the rationals.
fn solve_exact(nodes: &[Node]) -> BigRational {
    let n = nodes.len();
    // States that can reach a win.
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, node) in nodes.iter().enumerate() {
        for &(s, _) in &node.out {
            preds[s].push(i);
        }
    }
    let mut live = vec![false; n];
    let mut work: Vec<usize> = (0..n)
        .filter(|&i| matches!(nodes[i].terminal, Some(Terminal::LevelWin | Terminal::EnvWin)))
        .collect();
    for &w in &work {
        live[w] = true;
    }
    while let Some(v) = work.pop() {
        for &u in &preds[v] {
            if !live[u] && nodes[u].terminal.is_none() {
                live[u] = true;
                work.push(u);
            }
        }
    }
    if !live[0] {
        return BigRational::zero();
    }
    if nodes[0].terminal.is_some() {
        return BigRational::one();
    }

    let unknowns: Vec<usize> = (0..n).filter(|&i| live[i] && nodes[i].terminal.is_none()).collect();
    let col: HashMap<usize, usize> = unknowns.iter().enumerate().map(|(c, &i)| (i, c)).collect();
    let m = unknowns.len();
    // Row r: total * p_r - sum w p_succ = sum_{wins} w
    let mut rows: Vec<BTreeMap<usize, BigRational>> = Vec::with_capacity(m);
    let mut rhs: Vec<BigRational> = Vec::with_capacity(m);
    for &i in &unknowns {
        let mut row: BTreeMap<usize, BigRational> = BTreeMap::new();
        let mut b = BigRational::zero();
        let total: u64 = nodes[i].out.iter().map(|(_, w)| w).sum();
        *row.entry(col[&i]).or_insert_with(BigRational::zero) += rat(total);
        for &(s, w) in &nodes[i].out {
            match nodes[s].terminal {
                Some(Terminal::LevelWin | Terminal::EnvWin) => b += rat(w),
                Some(Terminal::GameOver) => {}
                None if live[s] => *row.entry(col[&s]).or_insert_with(BigRational::zero) -= rat(w),
                None => {}
            }
        }
        rows.push(row);
        rhs.push(b);
    }

    // Forward elimination on the sparse rows. The matrix is a diagonally
    // dominant M-matrix, so the diagonal pivot is never zero.
    for k in 0..m {
        let pivot = rows[k].get(&k).cloned().expect("nonzero pivot");
        for r in k + 1..m {
            let Some(factor) = rows[r].get(&k).cloned() else {
                continue;
            };
            let factor = factor / &pivot;
            let pivot_row: Vec<(usize, BigRational)> = rows[k].iter().map(|(c, v)| (*c, v.clone())).collect();
            for (c, v) in pivot_row {
                let entry = rows[r].entry(c).or_insert_with(BigRational::zero);
                *entry -= &factor * v;
                if entry.is_zero() {
                    rows[r].remove(&c);
                }
            }
            let delta = &factor * &rhs[k];
            rhs[r] -= delta;
        }
    }
    let mut x = vec![BigRational::zero(); m];
    for k in (0..m).rev() {
        let mut acc = rhs[k].clone();
        for (c, v) in rows[k].range(k + 1..) {
            acc -= v * &x[*c];
        }
        x[k] = acc / &rows[k][&k];
    }
    x[col[&0]].clone()
}

fn rat(v: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}
