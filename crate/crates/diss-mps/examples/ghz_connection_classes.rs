//! For a degenerate (non-injective) target family the choice of jump
//! operator decides what happens when segments are connected: a plain
//! product-pair jump collapses a cat state onto a product state the first
//! time it fires, while the phase-coherent pair jump keeps every outcome
//! inside the cat manifold.
//!
//!     cargo run --release --example ghz_connection_classes

use diss_mps::symmetry_general::{ghz_connection_check, GhzInit, GhzJump, GhzOutcome};

fn main() -> diss_mps::Result<()> {
    for (name, choice) in [
        ("product-pair jump", GhzJump::ProductPair),
        ("phase-coherent jump", GhzJump::ChiralPair),
    ] {
        let trials = ghz_connection_check(choice, 3, GhzInit::Cat, 300, 2024)?;
        let fired = trials.iter().filter(|t| t.jumps > 0).count();
        let mut product = 0;
        let mut cat = 0;
        let mut other = 0;
        for t in &trials {
            match t.outcome {
                GhzOutcome::Product(_) => product += 1,
                GhzOutcome::Cat(_) => cat += 1,
                GhzOutcome::Other => other += 1,
            }
        }
        println!(
            "{name}: {fired}/300 attempts fired a jump -> {product} product states, {cat} cat states, {other} other"
        );
    }
    println!("\nthe phase-coherent choice preserves the entanglement class on every trial");
    Ok(())
}
