//! Authors two small games from ASCII boards, registers them next to the
//! built-ins and runs the quick qualification regime on one of them.
//!
//!     cargo run --release -p gridbench --example custom_environment

use std::sync::Arc;

use gridbench::envs::{Launch, LaunchLevel, Push};
use gridbench::validation::{qualify, QualifyConfig, Regime};
use gridbench::Registry;

fn rows(board: &[&str]) -> Vec<String> {
    board.iter().map(|r| r.to_string()).collect()
}

fn main() {
    let push = Push::with_levels(
        "box2",
        vec![
            rows(&["#######", "#@ $ .#", "#######"]),
            rows(&["########", "#^^^^^^#", "#^.$ @^#", "#^  $.^#", "#^^^^^^#", "########"]),
        ],
    )
    .expect("valid boards");

    let launch = Launch::with_levels(
        "arc2",
        vec![LaunchLevel {
            shots: 2,
            board: rows(&["##########", "#   T    #", "#        #", "#        #", "#   L    #", "##########"]),
        }],
    )
    .expect("valid board");

    // Boards are checked when the game is built.
    let bad = Push::with_levels("bad1", vec![rows(&["#####", "# $ #", "#####"])]);
    println!("board without a player: {}", bad.err().unwrap());

    let mut registry = Registry::builtin();
    registry.register(Arc::new(push));
    registry.register(Arc::new(launch));
    for spec in registry.specs() {
        println!("{} levels {} actions {}", spec.game_id, spec.level_count, spec.action_set);
    }

    // This game fails: it has no committed win recording, and random play
    // solves its second level far too often.
    let config = QualifyConfig {
        regimes: vec![Regime::Sanity50k],
        seeds: vec![1],
        ..QualifyConfig::default()
    };
    let report = qualify(&registry, "box2", &config).unwrap();
    print!("{}", report.to_text());
    let env = registry.get("box2").unwrap();
    println!("mechanics of level 2: {:?}", env.mechanics(2));
}
