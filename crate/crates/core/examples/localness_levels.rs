//! Labels every method by how far its callees reach and summarizes the
//! levels among derivatives of the most frequent origins.
//!
//! `cargo run --example localness_levels`

use cgprune::fixture;
use cgprune::localness::{label_all, localness_distribution, HierarchyRule, LocalnessConfig};
use cgprune::origins::{find_origins, origin_edge_frequencies};

pub fn run() -> cgprune::Result<()> {
    let (h, cg) = fixture::canonical();
    for hierarchy in [HierarchyRule::Extended, HierarchyRule::Strict] {
        let cfg = LocalnessConfig {
            hierarchy,
            ..LocalnessConfig::default()
        };
        let labels = label_all(&cg, &h, cfg)?;
        println!("{hierarchy:?}: histogram {:?}", labels.histogram());
        for (node, level) in labels.iter() {
            println!("  {:<24} {}", cg.node(node)?.to_string(), level.value());
        }
    }

    let origins = find_origins(&cg, &h)?;
    let table = origin_edge_frequencies(&cg, &origins)?;
    let top: Vec<_> = table.top(3).iter().map(|r| r.origin.clone()).collect();
    let labels = label_all(&cg, &h, LocalnessConfig::default())?;
    for row in localness_distribution(&origins, &labels, &top)?.rows {
        println!("{}: {:?}", row.origin, row.frequencies);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> cgprune::Result<()> {
    run()
}
