//! Plays a dataset through an OpenAI-compatible chat endpoint.
//!
//!     GRIDBENCH_API_KEY=... cargo run -p gridbench-service --example openai_agent -- \
//!         http://localhost:8000/v1 my-model smp1,smp2
//!
//! The key is only read from the environment and never written anywhere.

use std::collections::HashMap;

use gridbench::envs::committed_baseline;
use gridbench::Registry;
use gridbench_service::agent::{run_reference_agent, AgentRunConfig, OpenAiEndpoint};

fn main() {
    let mut args = std::env::args().skip(1);
    let (Some(url), Some(model)) = (args.next(), args.next()) else {
        eprintln!("usage: openai_agent <api-root> <model> [games]");
        std::process::exit(2);
    };
    let dataset: Vec<String> = args.next().map_or(vec!["smp1".into()], |g| g.split(',').map(String::from).collect());
    let registry = Registry::builtin();
    let baselines: HashMap<_, _> = dataset
        .iter()
        .filter_map(|g| committed_baseline(g).map(|b| (g.clone(), b)))
        .collect();
    let config = AgentRunConfig {
        dataset,
        actor: model.clone(),
        ..AgentRunConfig::default()
    };
    let mut endpoint = OpenAiEndpoint::new(&url, &model, "GRIDBENCH_API_KEY");
    match run_reference_agent(&mut endpoint, &registry, &baselines, &config) {
        Ok(report) => {
            for run in &report.runs {
                println!("{}: {} actions, outcome {}", run.recording.game_id, run.recording.len(), run.recording.outcome);
            }
            if let Some(card) = report.scorecard {
                print!("{}", card.to_table());
            }
        }
        Err(e) => {
            eprintln!("run failed: {e}");
            std::process::exit(1);
        }
    }
}
