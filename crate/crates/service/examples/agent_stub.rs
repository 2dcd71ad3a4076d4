//! Runs the reference agent loop against scripted stand-ins for a model:
//! one that replays the optimal solution and one that repeats a single key
//! until the cutoff.
//!
//!     cargo run -p gridbench-service --example agent_stub

use std::collections::HashMap;

use gridbench::envs::committed_baseline;
use gridbench::Registry;
use gridbench_service::agent::{run_reference_agent, AgentRunConfig, ConstantEndpoint, ScriptedEndpoint};

fn main() {
    let registry = Registry::builtin();
    let baselines: HashMap<_, _> = ["smp1", "smp2"]
        .into_iter()
        .map(|g| (g.to_string(), committed_baseline(g).unwrap()))
        .collect();
    let config = AgentRunConfig {
        dataset: vec!["smp1".into()],
        ..AgentRunConfig::default()
    };

    let solution = &registry.recordings("smp1").unwrap()[0];
    let mut replayer = ScriptedEndpoint::replaying(solution);
    let report = run_reference_agent(&mut replayer, &registry, &baselines, &config).unwrap();
    print!("solution replayer\n{}", report.scorecard.unwrap().to_table());
    println!("first turn sent to the model:\n{}", replayer.seen[0][1].content.lines().last().unwrap());

    let mut stuck = ConstantEndpoint("I will go left: KEY3".into());
    let report = run_reference_agent(&mut stuck, &registry, &baselines, &config).unwrap();
    let run = &report.runs[0];
    println!("constant KEY3: {} actions, cut off {}", run.recording.len(), run.cut_off);
    print!("{}", report.scorecard.unwrap().to_table());
}
