//! Regenerates the data files shipped with the built-in environments:
//! authored win and loss recordings, synthetic first-run attempts and the
//! human baselines extracted from them.
//!
//!     cargo run --release -p gridbench --example generate_data [out_dir]
//!
//! The attempts are synthetic stand-ins for real play sessions. Each one
//! follows the shortest solution of every level padded with wasted moves
//! that return to the level's start state; participant B is second best on
//! every level, so B's counts become the baseline.

use std::collections::VecDeque;
use std::path::PathBuf;
use std::sync::Arc;

use gridbench::recording::{record_actions, Recorder};
use gridbench::scoring::extract_baseline;
use gridbench::validation::{build_state_graph, Budgets, StateGraph, Terminal};
use gridbench::{Action, Environment, Registry, Source};

/// Milliseconds between synthetic human actions.
const THINK_MS: u64 = 1500;

struct LevelPlan {
    win: Vec<Action>,
    loss: Option<Vec<Action>>,
    /// A short non-terminal cycle from the start state back to itself.
    detour: Vec<Action>,
}

fn detour(graph: &StateGraph) -> Vec<Action> {
    let mut prev: Vec<Option<(usize, Action)>> = vec![None; graph.nodes.len()];
    let mut queue = VecDeque::from([0usize]);
    let mut seen = vec![false; graph.nodes.len()];
    seen[0] = true;
    while let Some(i) = queue.pop_front() {
        for e in graph.out_edges(i) {
            let j = e.dst as usize;
            if j == 0 {
                let mut path = vec![e.action];
                let mut k = i;
                while let Some((p, a)) = prev[k] {
                    path.push(a);
                    k = p;
                }
                path.reverse();
                return path;
            }
            if !seen[j] && graph.nodes[j].terminal.is_none() {
                seen[j] = true;
                prev[j] = Some((i, e.action));
                queue.push_back(j);
            }
        }
    }
    panic!("level {} has no way back to its start state", graph.level)
}

fn plan(env: &dyn Environment) -> Vec<LevelPlan> {
    (1..=env.spec().level_count)
        .map(|level| {
            let graph = build_state_graph(env, level, &Budgets::nodes(4_000_000), 0).expect("graph");
            assert!(graph.stats.fully_explored, "level {level} must be fully explored");
            LevelPlan {
                win: graph.shortest_path(Terminal::is_win).expect("solvable level"),
                loss: graph.shortest_path(|t| t == Terminal::GameOver),
                detour: detour(&graph),
            }
        })
        .collect()
}

/// Plays every level with `pad(level)` detours first; `quit_on` stops the
/// attempt at the start of that level after a few wasted moves.
fn attempt(env: Arc<dyn Environment>, plans: &[LevelPlan], actor: &str, pad: impl Fn(u32) -> usize, quit_on: Option<u32>) -> gridbench::Recording {
    let mut rec = Recorder::new(env, 0, Source::Human, actor).expect("actor").without_clock();
    let mut clock = 0;
    let mut play = |rec: &mut Recorder, actions: &[Action]| {
        for &a in actions {
            clock += THINK_MS;
            rec.step_at(a, Some(clock)).expect("planned action");
        }
    };
    for (i, p) in plans.iter().enumerate() {
        let level = i as u32 + 1;
        let detours = if quit_on == Some(level) { 3 } else { pad(level) };
        for _ in 0..detours {
            play(&mut rec, &p.detour);
        }
        if quit_on == Some(level) {
            break;
        }
        play(&mut rec, &p.win);
    }
    rec.finish()
}

fn main() {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data"));
    std::fs::create_dir_all(out.join("attempts")).expect("create data dir");
    let registry = Registry::builtin();
    for game in ["smp1", "smp2", "tiny"] {
        let env = registry.get(game).expect("builtin");
        let plans = plan(env.as_ref());
        let n = plans.len();

        let win: Vec<Action> = plans.iter().flat_map(|p| p.win.clone()).collect();
        let optimal = record_actions(env.clone(), 0, Source::Authored, "author", &win).expect("win path");
        let mut loss: Vec<Action> = plans[..n - 1].iter().flat_map(|p| p.win.clone()).collect();
        loss.extend(plans[n - 1].loss.clone().expect("last level can be lost"));
        let lost = record_actions(env.clone(), 0, Source::Authored, "author", &loss).expect("loss path");
        std::fs::write(out.join(format!("{game}-win.rec")), optimal.to_text()).unwrap();
        std::fs::write(out.join(format!("{game}-loss.rec")), lost.to_text()).unwrap();
        println!("{game}: win {} actions, loss {} actions", optimal.len(), lost.len());

        if game == "tiny" {
            continue;
        }
        let attempts = vec![
            attempt(env.clone(), &plans, "participant-a", |l| if l % 2 == 1 { 1 } else { 3 }, None),
            attempt(env.clone(), &plans, "participant-b", |_| 2, None),
            attempt(env.clone(), &plans, "participant-c", |l| if l % 2 == 0 { 1 } else { 3 }, None),
            attempt(env.clone(), &plans, "participant-d", |_| 2, Some(n as u32)),
        ];
        for (a, name) in attempts.iter().zip(["a", "b", "c", "d"]) {
            std::fs::write(out.join("attempts").join(format!("{game}-{name}.rec")), a.to_text()).unwrap();
        }
        let baseline = extract_baseline(&attempts, game, &optimal).expect("baseline");
        std::fs::write(out.join(format!("{game}.baseline")), baseline.to_text()).unwrap();
        println!("{game}: baseline {:?}", baseline.levels.iter().map(|l| l.h).collect::<Vec<_>>());
    }
}
