//! Explores a level's state graph under a node budget and compares the
//! exact random-play win probability with a Monte Carlo estimate.
//!
//!     cargo run --release -p gridbench --example win_probability -- [game] [level]

use gridbench::validation::{build_state_graph, estimate_win_probability, monte_carlo, Budgets, Terminal};
use gridbench::Registry;

fn main() {
    let mut args = std::env::args().skip(1);
    let game = args.next().unwrap_or_else(|| "tiny".into());
    let level: u32 = args.next().map_or(1, |l| l.parse().expect("level number"));
    let registry = Registry::builtin();
    let env = registry.get(&game).expect("known game id");

    for nodes in [16, 256, 4096, 2_000_000] {
        let graph = build_state_graph(env.as_ref(), level, &Budgets::nodes(nodes), 0).expect("graph");
        let p = estimate_win_probability(&graph).expect("estimate");
        println!(
            "budget {nodes:>8}: nodes {:>7} explored {:<5} p_win in [{:.3e}, {:.3e}]",
            graph.stats.node_count, graph.stats.fully_explored, p.lower, p.upper
        );
        if graph.stats.fully_explored {
            let path = graph.shortest_path(Terminal::is_win);
            println!("shortest win: {:?}", path.map(|p| p.iter().map(|a| a.to_string()).collect::<Vec<_>>()));
            break;
        }
    }
    let mc = monte_carlo(env.as_ref(), level, 200_000, 1, 10_000, 0.99);
    println!(
        "monte carlo: {} wins in {} rollouts, 99% interval [{:.3e}, {:.3e}]",
        mc.wins, mc.rollouts, mc.lower, mc.upper
    );
}
