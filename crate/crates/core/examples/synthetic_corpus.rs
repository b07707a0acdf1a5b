//! Generates seeded hierarchies with CHA call graphs and cross-checks the
//! origin finder against the brute-force reference.
//!
//! `cargo run --example synthetic_corpus`

use cgprune::origins::find_origins;
use cgprune::synth::{brute_force_origins, generate, GenParams};

pub fn run() -> cgprune::Result<()> {
    for seed in 0..5 {
        let p = GenParams {
            type_count: 80,
            max_parents_per_type: 3,
            seed,
            ..GenParams::default()
        };
        let (h, cg) = generate(&p)?;
        let fast = find_origins(&cg, &h)?;
        let slow = brute_force_origins(&cg, &h)?;
        println!(
            "seed {seed}: {} types, {} methods, {} edges, {} targets, {} ambiguous, agree={}",
            h.len(),
            cg.node_count(),
            cg.edge_count(),
            fast.len(),
            fast.ambiguities().len(),
            fast == slow
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> cgprune::Result<()> {
    run()
}
