//! Asks a decision oracle before removing each candidate edge.
//!
//! `cargo run --example selective_pruning`

use cgprune::origins::{build_exclusion_list, find_origins, origin_edge_frequencies};
use cgprune::prune::{
    prune_exhaustive, prune_selective, Decision, EdgeContext, KeepAll, OracleError, PruneAll, PruneDecisionOracle,
    SeededOracle,
};
use cgprune::synth::{generate, GenParams};

/// Prunes calls that stay inside one project, refuses anything else.
struct SameProject;

impl PruneDecisionOracle for SameProject {
    fn decide(&self, ctx: &EdgeContext<'_>) -> Result<Decision, OracleError> {
        if ctx.source_type.project == ctx.target_type.project {
            Ok(Decision::prune(0.9))
        } else {
            Ok(Decision::keep(0.9))
        }
    }
}

pub fn run() -> cgprune::Result<()> {
    let (h, cg) = generate(&GenParams {
        type_count: 60,
        seed: 5,
        ..GenParams::default()
    })?;
    let list = build_exclusion_list(&origin_edge_frequencies(&cg, &find_origins(&cg, &h)?)?, 3);
    let exhaustive = prune_exhaustive(&cg, &list, &h)?;
    println!("{} edges, {} candidates", cg.edge_count(), exhaustive.candidate_edges);
    println!("exhaustive     -> {}", exhaustive.graph.edge_count());

    let seeded = SeededOracle {
        seed: 1,
        prune_rate: 0.5,
    };
    let oracles: [(&str, &dyn PruneDecisionOracle); 4] = [
        ("keep-all", &KeepAll),
        ("prune-all", &PruneAll),
        ("seeded", &seeded),
        ("same-project", &SameProject),
    ];
    for (name, oracle) in oracles {
        for threshold in [0.0, 0.5, 0.95] {
            let r = prune_selective(&cg, &list, &h, oracle, threshold)?;
            println!("{name:<14} t={threshold:<4} -> {}", r.graph.edge_count());
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> cgprune::Result<()> {
    run()
}
