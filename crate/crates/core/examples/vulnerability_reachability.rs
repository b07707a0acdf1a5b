//! Marks random dependency methods as vulnerable and checks which are
//! reachable from application code before and after pruning.
//!
//! `cargo run --example vulnerability_reachability`

use cgprune::origins::{build_exclusion_list, find_origins, origin_edge_frequencies};
use cgprune::prune::prune_exhaustive;
use cgprune::synth::{self, generate, GenParams};
use cgprune::vuln::{compare, inject_artificial_cves, propagate_timed, witnesses, ProjectRoleMap, TimingConfig};

pub fn run() -> cgprune::Result<()> {
    let (h, cg) = generate(&GenParams {
        type_count: 120,
        seed: 9,
        ..GenParams::default()
    })?;
    let roles = ProjectRoleMap::new(synth::APPLICATION_PROJECT);
    let assignment = inject_artificial_cves(&cg, &h, &roles, 10, 42)?;
    let base = propagate_timed(&cg, &h, &assignment, &roles, TimingConfig::default())?;
    println!(
        "baseline: {} pairs, {:.2} of vulnerabilities reachable",
        base.reachable_pairs, base.reachable_vuln_fraction
    );

    let table = origin_edge_frequencies(&cg, &find_origins(&cg, &h)?)?;
    for n in [1, 2, 5] {
        let pruned = prune_exhaustive(&cg, &build_exclusion_list(&table, n), &h)?;
        let after = propagate_timed(&pruned.graph, &h, &assignment, &roles, TimingConfig::default())?;
        let delta = compare(&base, &after)?;
        println!(
            "top-{n}: {} pairs ({:+}), fraction {:.2} ({:+.2}), speedup {:.2}",
            after.reachable_pairs, delta.pair_delta, after.reachable_vuln_fraction, delta.fraction_delta, delta.speedup
        );
    }

    if let Some(w) = witnesses(&cg, &h, &assignment, &roles)?.first() {
        let path: Vec<String> = w
            .path
            .iter()
            .map(|n| cg.node(*n).map(|m| m.to_string()))
            .collect::<Result<_, _>>()?;
        println!("witness: {}", path.join(" -> "));
        assert!(w.verify(&cg));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> cgprune::Result<()> {
    run()
}
