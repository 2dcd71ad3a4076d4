//! Scores a committed human attempt against the frozen baseline and prints
//! the per-level breakdown.
//!
//!     cargo run -p gridbench --example score_run

use gridbench::envs::{committed_attempts, committed_baseline};
use gridbench::scoring::{score_recording, Scorecard};

fn main() {
    let mut cards = Vec::new();
    for game in ["smp1", "smp2"] {
        let baseline = committed_baseline(game).expect("benchmark games have baselines");
        println!("{game} baseline sha256 {}", baseline.sha256());
        for attempt in committed_attempts(game) {
            let card = score_recording(&attempt, &baseline).expect("same game");
            println!("  {:<14} counts {:?} score {:.3}", attempt.actor, attempt.level_counts(), card.score);
            if attempt.actor == "participant-c" {
                cards.push(card);
            }
        }
    }
    let total = Scorecard::new(cards).expect("non-empty");
    print!("{}", total.to_table());
}
