//! Breadth-first state-graph construction from a level's reset state.
//!
//! Nodes are merged by state digest. Every node that is expanded gets one
//! out-edge per key action in the action set (invalid actions become
//! self-edges) and one Select edge per distinct successor, weighted by the
//! number of cells that lead there. Undo and Reset are not modelled: their
//! effect depends on the trajectory, not the state.
//!
//! Graph file format (line oriented, `#` starts a comment line):
//!
//! ```text
//! # gridbench state-graph v1
//! game smp1 level 2
//! stats nodes 12 edges 60 merge_density 0.600000000 max_depth 4 cycle yes fully_explored yes
//! [nodes]
//! <digest> <depth> <terminal|->
//! [frontier]
//! <digest>
//! [edges]
//! <src digest> <action> <dst digest> [<select weight>]
//! ```
//!
//! Nodes are listed in discovery order and edges in expansion order, so equal
//! inputs give byte-identical files.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rayon::prelude::*;

use crate::action::{Action, ActionKind};
use crate::digest::{frame_digest, state_digest, StateDigest};
use crate::env::{EnvRng, Environment, LevelEvent, LevelState};
use crate::frame::{Frame, CELL_COUNT};
use crate::validation::{Terminal, ValidationError};

/// Weight of one key action, in cells. A Select edge's weight is its cell
/// count, so every expanded node's out-weights sum to `kinds * KEY_WEIGHT`.
pub const KEY_WEIGHT: u32 = CELL_COUNT as u32;

const EXPANSION_CHUNK: usize = 256;

/// Exploration limits. `None` is unbounded; at least one must be set.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Budgets {
    /// Environment steps simulated.
    pub max_steps: Option<u64>,
    pub max_seconds: Option<f64>,
    pub max_nodes: Option<usize>,
    pub max_edges: Option<usize>,
}

impl Budgets {
    pub fn nodes(n: usize) -> Self {
        Self {
            max_nodes: Some(n),
            ..Self::default()
        }
    }

    pub fn steps(n: u64) -> Self {
        Self {
            max_steps: Some(n),
            ..Self::default()
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.max_steps.is_some() || self.max_seconds.is_some() || self.max_nodes.is_some() || self.max_edges.is_some()
    }
}

/// Why exploration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Exhausted,
    Steps,
    Seconds,
    Nodes,
    Edges,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphNode {
    pub digest: StateDigest,
    /// Breadth-first depth at which the node was first seen.
    pub depth: u32,
    pub terminal: Option<Terminal>,
    /// Digest of the node's rendered frame.
    pub frame: u64,
    pub expanded: bool,
    /// The edge through which the node was first reached.
    pub parent: Option<(u32, Action)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphEdge {
    pub src: u32,
    pub action: Action,
    pub dst: u32,
    /// Cells for Select edges, [`KEY_WEIGHT`] for key edges.
    pub weight: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphStats {
    pub node_count: usize,
    pub edge_count: usize,
    pub merge_density: f64,
    pub max_depth: u32,
    pub cycle_detected: bool,
    pub fully_explored: bool,
    pub steps: u64,
    pub stop: StopReason,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct StateGraph {
    pub game_id: String,
    pub level: u32,
    /// Number of state action kinds; every expanded node has out-weight
    /// `action_kinds * KEY_WEIGHT`.
    pub action_kinds: u32,
    pub nodes: Vec<GraphNode>,
    /// Grouped by source, in expansion order.
    pub edges: Vec<GraphEdge>,
    pub stats: GraphStats,
    index: HashMap<StateDigest, u32>,
    /// Start of each expanded node's edge run in `edges`.
    out_start: HashMap<u32, (u32, u32)>,
}

impl StateGraph {
    pub fn node_index(&self, digest: StateDigest) -> Option<usize> {
        self.index.get(&digest).map(|&i| i as usize)
    }

    /// Out-edges of node `i`; empty for terminals and frontier nodes.
    pub fn out_edges(&self, i: usize) -> &[GraphEdge] {
        match self.out_start.get(&(i as u32)) {
            Some(&(start, len)) => &self.edges[start as usize..(start + len) as usize],
            None => &[],
        }
    }

    /// Non-terminal nodes that were discovered but not expanded.
    pub fn frontier(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.terminal.is_none() && !n.expanded)
            .map(|(i, _)| i)
    }

    pub fn terminals(&self) -> impl Iterator<Item = (StateDigest, Terminal)> + '_ {
        self.nodes.iter().filter_map(|n| n.terminal.map(|t| (n.digest, t)))
    }

    /// Actions along the breadth-first tree from the reset state to node `i`.
    pub fn path_to(&self, mut i: usize) -> Vec<Action> {
        let mut path = Vec::new();
        while let Some((p, a)) = self.nodes[i].parent {
            path.push(a);
            i = p as usize;
        }
        path.reverse();
        path
    }

    /// A shortest action sequence from the reset state to a terminal
    /// matching `want`.
    pub fn shortest_path(&self, want: impl Fn(Terminal) -> bool) -> Option<Vec<Action>> {
        let target = self
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.terminal.is_some_and(&want))
            .min_by_key(|(i, n)| (n.depth, *i))?
            .0;
        Some(self.path_to(target))
    }

    pub fn to_text(&self) -> String {
        let s = &self.stats;
        let yn = |b: bool| if b { "yes" } else { "no" };
        let mut out = String::with_capacity(64 * (self.nodes.len() + self.edges.len()) + 256);
        out.push_str("# gridbench state-graph v1\n");
        let _ = writeln!(out, "game {} level {}", self.game_id, self.level);
        let _ = writeln!(
            out,
            "stats nodes {} edges {} merge_density {:.9} max_depth {} cycle {} fully_explored {}",
            s.node_count,
            s.edge_count,
            s.merge_density,
            s.max_depth,
            yn(s.cycle_detected),
            yn(s.fully_explored)
        );
        out.push_str("[nodes]\n");
        for n in &self.nodes {
            let t = n.terminal.map_or("-", Terminal::name);
            let _ = writeln!(out, "{} {} {}", n.digest, n.depth, t);
        }
        out.push_str("[frontier]\n");
        for i in self.frontier() {
            let _ = writeln!(out, "{}", self.nodes[i].digest);
        }
        out.push_str("[edges]\n");
        for e in &self.edges {
            let src = self.nodes[e.src as usize].digest;
            let dst = self.nodes[e.dst as usize].digest;
            match e.action {
                Action::Select { .. } => {
                    let _ = writeln!(out, "{} {} {} {}", src, e.action, dst, e.weight);
                }
                _ => {
                    let _ = writeln!(out, "{} {} {}", src, e.action, dst);
                }
            }
        }
        out
    }
}

/// (action, weight, successor digest, terminal, frame digest, state)
type Successor = (Action, u32, StateDigest, Option<Terminal>, u64, Option<Box<dyn LevelState>>);

struct Expansion {
    succ: Vec<Successor>,
    steps: u64,
}

/// Explores `level` of `env` breadth-first until the frontier is empty or a
/// budget is hit. Expansion is atomic per node: a node whose expansion would
/// cross a node, edge or step limit stays on the frontier.
///
/// `seed` only matters for environments that draw randomness in `step`;
/// each (state, action) pair gets a generator seeded from `seed` and the
/// state digest.
pub fn build_state_graph(
    env: &dyn Environment,
    level: u32,
    budgets: &Budgets,
    seed: u64,
) -> Result<StateGraph, ValidationError> {
    let spec = env.spec();
    if level == 0 || level > spec.level_count {
        return Err(ValidationError::LevelOutOfRange {
            level,
            level_count: spec.level_count,
        });
    }
    if !budgets.is_bounded() {
        return Err(ValidationError::BudgetsAllUnbounded);
    }
    let started = Instant::now();
    let kinds: Vec<ActionKind> = spec.state_actions().kinds().collect();
    let version = spec.state_version;
    let final_level = level == spec.level_count;

    let digest_of = |st: &dyn LevelState, frame: &mut Frame, buf: &mut Vec<u8>| -> (StateDigest, u64) {
        st.render(frame);
        buf.clear();
        st.encode(buf);
        (state_digest(level, version, buf, frame), frame_digest(frame))
    };

    let expand = |state: &dyn LevelState, digest: StateDigest| -> Expansion {
        let mut frame = Frame::filled(0);
        let mut buf = Vec::with_capacity(64);
        let mut succ: Vec<Successor> = Vec::new();
        let mut steps = 0;
        let mut select_seen: HashMap<StateDigest, usize> = HashMap::new();
        for &kind in &kinds {
            let tries: Vec<(Action, u32)> = match Action::from_kind(kind) {
                Some(a) => vec![(a, KEY_WEIGHT)],
                None => state.select_classes().iter().map(|c| (c.action(), c.weight)).collect(),
            };
            for (action, weight) in tries {
                let mut next = state.clone_box();
                let mut rng = EnvRng::seed_from_u64(seed ^ digest.0);
                let outcome = next.step(action, &mut rng);
                steps += 1;
                let terminal = match outcome.event {
                    LevelEvent::None => None,
                    LevelEvent::Lost => Some(Terminal::GameOver),
                    LevelEvent::Won if final_level => Some(Terminal::EnvWin),
                    LevelEvent::Won => Some(Terminal::LevelWin),
                };
                let (d, fd) = digest_of(next.as_ref(), &mut frame, &mut buf);
                if kind == ActionKind::Select {
                    if let Some(&k) = select_seen.get(&d) {
                        succ[k].1 += weight;
                        continue;
                    }
                    select_seen.insert(d, succ.len());
                }
                let keep = terminal.is_none().then_some(next);
                succ.push((action, weight, d, terminal, fd, keep));
            }
        }
        Expansion { succ, steps }
    };

    let root = env.reset_state(level);
    let mut frame = Frame::filled(0);
    let mut buf = Vec::new();
    let (root_digest, root_frame) = digest_of(root.as_ref(), &mut frame, &mut buf);

    let mut nodes = vec![GraphNode {
        digest: root_digest,
        depth: 0,
        terminal: None,
        frame: root_frame,
        expanded: false,
        parent: None,
    }];
    let mut index: HashMap<StateDigest, u32> = HashMap::from([(root_digest, 0)]);
    let mut edges: Vec<GraphEdge> = Vec::new();
    let mut out_start: HashMap<u32, (u32, u32)> = HashMap::new();
    let mut queue: std::collections::VecDeque<(u32, Box<dyn LevelState>)> = [(0u32, root)].into();
    let mut steps = 0u64;
    let mut arrivals = 0u64;
    let mut revisits = 0u64;
    let mut stop = StopReason::Exhausted;

    'outer: while !queue.is_empty() {
        if let Some(limit) = budgets.max_seconds {
            if started.elapsed().as_secs_f64() >= limit {
                stop = StopReason::Seconds;
                break;
            }
        }
        let take = queue.len().min(EXPANSION_CHUNK);
        let batch: Vec<(u32, Box<dyn LevelState>)> = queue.drain(..take).collect();
        let results: Vec<Expansion> = batch
            .par_iter()
            .map(|(id, st)| expand(st.as_ref(), nodes[*id as usize].digest))
            .collect();

        for ((id, _), exp) in batch.into_iter().zip(results) {
            let new_nodes = {
                let mut fresh: Vec<StateDigest> = Vec::new();
                for s in &exp.succ {
                    if !index.contains_key(&s.2) && !fresh.contains(&s.2) {
                        fresh.push(s.2);
                    }
                }
                fresh.len()
            };
            let over = if budgets.max_steps.is_some_and(|m| steps + exp.steps > m) {
                Some(StopReason::Steps)
            } else if budgets.max_nodes.is_some_and(|m| nodes.len() + new_nodes > m) {
                Some(StopReason::Nodes)
            } else if budgets.max_edges.is_some_and(|m| edges.len() + exp.succ.len() > m) {
                Some(StopReason::Edges)
            } else {
                None
            };
            if let Some(reason) = over {
                stop = reason;
                break 'outer;
            }

            steps += exp.steps;
            let depth = nodes[id as usize].depth + 1;
            let start = edges.len() as u32;
            for (action, weight, d, terminal, fd, state) in exp.succ {
                arrivals += 1;
                let dst = match index.get(&d) {
                    Some(&j) => {
                        revisits += 1;
                        j
                    }
                    None => {
                        let j = nodes.len() as u32;
                        index.insert(d, j);
                        nodes.push(GraphNode {
                            digest: d,
                            depth,
                            terminal,
                            frame: fd,
                            expanded: false,
                            parent: Some((id, action)),
                        });
                        if let Some(st) = state {
                            queue.push_back((j, st));
                        }
                        j
                    }
                };
                edges.push(GraphEdge { src: id, action, dst, weight });
            }
            nodes[id as usize].expanded = true;
            out_start.insert(id, (start, edges.len() as u32 - start));
        }
    }

    let max_depth = nodes.iter().map(|n| n.depth).max().unwrap_or(0);
    let cycle_detected = has_cycle(nodes.len(), &edges);
    let fully_explored = stop == StopReason::Exhausted;
    let stats = GraphStats {
        node_count: nodes.len(),
        edge_count: edges.len(),
        merge_density: if arrivals == 0 { 0.0 } else { revisits as f64 / arrivals as f64 },
        max_depth,
        cycle_detected,
        fully_explored,
        steps,
        stop,
        elapsed: started.elapsed(),
    };
    Ok(StateGraph {
        game_id: spec.game_id.to_string(),
        level,
        action_kinds: kinds.len() as u32,
        nodes,
        edges,
        stats,
        index,
        out_start,
    })
}

/// Whether the graph has a directed cycle of length two or more. Self-edges
/// are ignored. Kahn's algorithm: a cycle exists iff some node never reaches
/// in-degree zero.
fn has_cycle(n: usize, edges: &[GraphEdge]) -> bool {
    let mut indeg = vec![0u32; n];
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    for e in edges.iter().filter(|e| e.src != e.dst) {
        indeg[e.dst as usize] += 1;
        adj[e.src as usize].push(e.dst);
    }
    let mut ready: Vec<u32> = (0..n as u32).filter(|&i| indeg[i as usize] == 0).collect();
    let mut removed = 0;
    while let Some(v) = ready.pop() {
        removed += 1;
        for &w in &adj[v as usize] {
            indeg[w as usize] -= 1;
            if indeg[w as usize] == 0 {
                ready.push(w);
            }
        }
    }
    removed < n
}
