//! Builds the state graph of every level of a built-in environment and
//! prints its size, the random-policy win probability and the length of a
//! shortest solution.
//!
//!     cargo run --release -p gridbench --example explore_levels -- smp1 [max_nodes]

use std::time::Instant;

use gridbench::validation::{build_state_graph, estimate_win_probability, Budgets, Terminal};
use gridbench::Registry;

fn main() {
    let mut args = std::env::args().skip(1);
    let game = args.next().unwrap_or_else(|| "tiny".to_string());
    let max_nodes = args.next().map_or(2_000_000, |n| n.parse().expect("node budget"));
    let registry = Registry::builtin();
    let env = registry.get(&game).expect("known game id");

    println!("{:>5} {:>9} {:>10} {:>6} {:>9} {:>12} {:>6} {:>6} {:>8}", "level", "nodes", "edges", "depth", "explored", "p_win", "win", "loss", "secs");
    for level in 1..=env.spec().level_count {
        let started = Instant::now();
        let graph = build_state_graph(env.as_ref(), level, &Budgets::nodes(max_nodes), 0).expect("graph");
        let p = match estimate_win_probability(&graph) {
            Ok(w) => match w.exact {
                Some(p) => format!("{p:.3e}"),
                None => format!("<={:.1e}", w.upper),
            },
            Err(e) => e.to_string(),
        };
        let win = graph.shortest_path(Terminal::is_win).map_or("-".into(), |p| p.len().to_string());
        let loss = graph
            .shortest_path(|t| t == Terminal::GameOver)
            .map_or("-".into(), |p| p.len().to_string());
        println!(
            "{:>5} {:>9} {:>10} {:>6} {:>9} {:>12} {:>6} {:>6} {:>8.2}",
            level,
            graph.stats.node_count,
            graph.stats.edge_count,
            graph.stats.max_depth,
            graph.stats.fully_explored,
            p,
            win,
            loss,
            started.elapsed().as_secs_f64()
        );
    }
}
