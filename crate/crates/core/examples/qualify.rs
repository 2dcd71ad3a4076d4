//! Runs the full qualification of a built-in environment: the random-play
//! regimes, replay of its committed recordings and the per-level
//! win-probability bound.
//!
//!     cargo run --release -p gridbench --example qualify -- smp1

use std::time::Instant;

use gridbench::validation::{qualify, QualifyConfig};
use gridbench::Registry;

fn main() {
    let game = std::env::args().nth(1).unwrap_or_else(|| "smp1".to_string());
    let registry = Registry::builtin();
    let started = Instant::now();
    let report = qualify(&registry, &game, &QualifyConfig::default()).expect("qualification runs");
    print!("{}", report.to_text());
    println!("took {:.1}s", started.elapsed().as_secs_f64());
    std::process::exit(if report.pass { 0 } else { 1 });
}
