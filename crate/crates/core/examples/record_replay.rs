//! Records a short session, writes it as text, parses it back and replays
//! it. Then flips one stored digest to show how a divergence is reported.
//!
//!     cargo run -p gridbench --example record_replay

use gridbench::digest::StateDigest;
use gridbench::{replay, Action, Recorder, Recording, Registry, Source};

fn main() {
    let registry = Registry::builtin();
    let env = registry.get("smp2").unwrap();
    let mut recorder = Recorder::new(env, 42, Source::Human, "demo").unwrap().without_clock();
    for a in [Action::Key2, Action::Key3, Action::Key4, Action::Key5] {
        recorder.step(a).unwrap();
    }
    let text = recorder.finish().to_text();
    print!("{text}");

    let rec = Recording::parse(&text).unwrap();
    println!("replay: {:?}", replay(&registry, &rec).unwrap());

    let mut tampered = rec.clone();
    tampered.actions[2].digest = StateDigest(tampered.actions[2].digest.0 ^ 1);
    println!("tampered: {:?}", replay(&registry, &tampered).unwrap());
}
