//! Removes edges into derivatives of the most frequent origin methods.
//!
//! `cargo run --example prune_callgraph`

use cgprune::fixture;
use cgprune::origins::{build_exclusion_list, find_origins, origin_edge_frequencies};
use cgprune::prune::prune_exhaustive;

pub fn run() -> cgprune::Result<()> {
    let (h, cg) = fixture::canonical();
    let table = origin_edge_frequencies(&cg, &find_origins(&cg, &h)?)?;
    for n in 0..=table.len() {
        let list = build_exclusion_list(&table, n);
        let pruned = prune_exhaustive(&cg, &list, &h)?;
        println!(
            "top-{n}: {} -> {} edges ({:.3} reduction)",
            cg.edge_count(),
            pruned.graph.edge_count(),
            pruned.reduction_ratio
        );
    }
    let list = build_exclusion_list(&table, 1);
    for (sig, origin) in list.entries() {
        println!("excluded: {origin}.{sig}");
    }
    for e in prune_exhaustive(&cg, &list, &h)?.graph.edges() {
        println!("  kept {} -> {}", cg.node(e.source)?, cg.node(e.target)?);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> cgprune::Result<()> {
    run()
}
