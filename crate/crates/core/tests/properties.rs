use std::collections::HashSet;

use proptest::prelude::*;

use cgprune::graph::{CallEdge, CallGraph, TypeHierarchy};
use cgprune::io;
use cgprune::localness::{label_all, HierarchyRule, LocalnessConfig, ProjectBoundary};
use cgprune::origins::{build_exclusion_list, find_origins, origin_edge_frequencies, OriginFrequencyTable};
use cgprune::pipeline::{run_pipeline, PipelineConfig, SyntheticCorpus};
use cgprune::prune::{prune_exhaustive, prune_selective, SeededOracle};
use cgprune::synth::{self, generate, GenParams};
use cgprune::vuln::{eligible_nodes, inject_artificial_cves, propagate, ProjectRoleMap};

fn params() -> impl Strategy<Value = GenParams> {
    (
        4usize..70,
        1usize..4,
        1usize..9,
        0.0f64..=1.0,
        (0usize..3, 0usize..3),
        1usize..4,
        0.0f64..0.4,
        any::<u64>(),
    )
        .prop_map(
            |(types, parents, pool, overrides, (lo, extra), projects, core, seed)| GenParams {
                type_count: types,
                max_parents_per_type: parents,
                signature_pool_size: pool,
                override_probability: overrides,
                call_sites_per_method: (lo, lo + extra),
                project_count: projects,
                core_type_fraction: core,
                seed,
            },
        )
}

fn corpus() -> impl Strategy<Value = (TypeHierarchy, CallGraph)> {
    params().prop_map(|p| generate(&p).expect("valid params"))
}

fn table(h: &TypeHierarchy, cg: &CallGraph) -> OriginFrequencyTable {
    origin_edge_frequencies(cg, &find_origins(cg, h).unwrap()).unwrap()
}

fn edges(cg: &CallGraph) -> HashSet<CallEdge> {
    cg.edges().iter().cloned().collect()
}

fn configs() -> [LocalnessConfig; 4] {
    [
        (HierarchyRule::Extended, ProjectBoundary::Project),
        (HierarchyRule::Strict, ProjectBoundary::Project),
        (HierarchyRule::Extended, ProjectBoundary::Package),
        (HierarchyRule::Strict, ProjectBoundary::Package),
    ]
    .map(|(hierarchy, boundary)| LocalnessConfig { hierarchy, boundary })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ancestors_are_acyclic_and_transitive((h, _) in corpus()) {
        for t in h.types() {
            let anc = h.ancestors_of(&t.id).unwrap();
            prop_assert!(!anc.contains(&t.id));
            for a in &anc {
                prop_assert!(h.is_reflexive_descendant(a, &t.id).unwrap());
                prop_assert!(!h.is_reflexive_descendant(&t.id, a).unwrap());
                for b in h.ancestors_of(a).unwrap() {
                    prop_assert!(anc.contains(&b));
                }
            }
        }
    }

    #[test]
    fn origins_are_first_declarations((h, cg) in corpus()) {
        let origins = find_origins(&cg, &h).unwrap();
        for (node, origin) in origins.iter() {
            let target = &cg.nodes()[node.index()];
            prop_assert_eq!(&origin.signature, &target.signature);
            prop_assert!(h.get(&origin.origin_type).unwrap().declares(&origin.signature));
            prop_assert!(h.is_reflexive_descendant(&origin.origin_type, &target.defining_type).unwrap());
            for a in h.ancestors_of(&origin.origin_type).unwrap() {
                prop_assert!(!h.get(&a).unwrap().declares(&origin.signature));
            }
        }
    }

    #[test]
    fn pruning_never_raises_localness((h, cg) in corpus(), n in 0usize..6) {
        let pruned = prune_exhaustive(&cg, &build_exclusion_list(&table(&h, &cg), n), &h).unwrap();
        for cfg in configs() {
            let before = label_all(&cg, &h, cfg).unwrap();
            let after = label_all(&pruned.graph, &h, cfg).unwrap();
            for (node, level) in after.iter() {
                prop_assert!(level <= before.get(node).unwrap());
            }
        }
    }

    #[test]
    fn prune_is_a_monotone_idempotent_filter((h, cg) in corpus(), a in 0usize..8, b in 0usize..8) {
        let t = table(&h, &cg);
        let (small, large) = (a.min(b), a.max(b));
        let ps = prune_exhaustive(&cg, &build_exclusion_list(&t, small), &h).unwrap();
        let pl = prune_exhaustive(&cg, &build_exclusion_list(&t, large), &h).unwrap();
        prop_assert_eq!(ps.graph.nodes(), cg.nodes());
        prop_assert!(edges(&ps.graph).is_subset(&edges(&cg)));
        prop_assert!(edges(&pl.graph).is_subset(&edges(&ps.graph)));
        let again = prune_exhaustive(&pl.graph, &build_exclusion_list(&t, large), &h).unwrap();
        prop_assert_eq!(again.graph.edges(), pl.graph.edges());
        prop_assert_eq!(pl.pruned_edges + pl.graph.edge_count(), cg.edge_count());
    }

    #[test]
    fn selective_keeps_a_superset(
        (h, cg) in corpus(),
        n in 1usize..6,
        seed in any::<u64>(),
        rate in 0.0f64..=1.0,
        threshold in 0.0f64..=1.0,
    ) {
        let list = build_exclusion_list(&table(&h, &cg), n);
        let exhaustive = prune_exhaustive(&cg, &list, &h).unwrap();
        let selective = prune_selective(&cg, &list, &h, &SeededOracle { seed, prune_rate: rate }, threshold).unwrap();
        prop_assert!(edges(&exhaustive.graph).is_subset(&edges(&selective.graph)));
        prop_assert_eq!(selective.candidate_edges, exhaustive.candidate_edges);
    }

    #[test]
    fn reachability_shrinks_with_pruning((h, cg) in corpus(), n in 0usize..8, k in 1usize..10, seed in any::<u64>()) {
        let roles = ProjectRoleMap::new(synth::APPLICATION_PROJECT);
        prop_assume!(!eligible_nodes(&cg, &h, &roles).unwrap().is_empty());
        let a = inject_artificial_cves(&cg, &h, &roles, k, seed).unwrap();
        let base = propagate(&cg, &h, &a, &roles).unwrap();
        let pruned = prune_exhaustive(&cg, &build_exclusion_list(&table(&h, &cg), n), &h).unwrap();
        let after = propagate(&pruned.graph, &h, &a, &roles).unwrap();
        prop_assert!(after.reachable_pairs <= base.reachable_pairs);
        prop_assert!(after.reachable_vuln_fraction <= base.reachable_vuln_fraction);
        prop_assert!(after.reached_vulnerable <= base.reached_vulnerable);
    }

    #[test]
    fn interchange_round_trips((h, cg) in corpus()) {
        let mut buf = Vec::new();
        io::write_bundle(&mut buf, &h, &cg).unwrap();
        let h2 = io::read_hierarchy("mem", buf.as_slice()).unwrap();
        let cg2 = io::read_call_graph("mem", buf.as_slice(), &h2).unwrap();
        let mut again = Vec::new();
        io::write_bundle(&mut again, &h2, &cg2).unwrap();
        prop_assert_eq!(&h2, &h);
        prop_assert_eq!(&cg2, &cg);
        prop_assert_eq!(again, buf);
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

#[test]
fn aggregates_match_recomputation() {
    let mut config = PipelineConfig::new("aggregates");
    config.synthetic = Some(SyntheticCorpus {
        count: 6,
        params: GenParams {
            type_count: 50,
            seed: 3,
            ..GenParams::default()
        },
    });
    config.sweep = vec![0, 1, 2, 5];
    config.cves = 6;
    let report = run_pipeline(&config).unwrap();
    assert!(report.failures.is_empty());
    for agg in &report.aggregates {
        let rows: Vec<_> = report.records.iter().filter(|r| r.top_n == agg.top_n).collect();
        assert_eq!(rows.len(), agg.graphs);
        let columns: [(&str, Vec<f64>, cgprune::pipeline::Stat); 6] = [
            ("nodes", rows.iter().map(|r| r.nodes as f64).collect(), agg.nodes),
            ("edges", rows.iter().map(|r| r.edges as f64).collect(), agg.edges),
            (
                "reduction",
                rows.iter().map(|r| r.reduction_ratio).collect(),
                agg.reduction_ratio,
            ),
            (
                "pairs",
                rows.iter().map(|r| r.reachable_pairs as f64).collect(),
                agg.reachable_pairs,
            ),
            (
                "fraction",
                rows.iter().map(|r| r.reachable_fraction).collect(),
                agg.reachable_fraction,
            ),
            (
                "analysis",
                rows.iter().map(|r| r.analysis_secs.unwrap()).collect(),
                agg.analysis_secs.unwrap(),
            ),
        ];
        for (name, xs, stat) in columns {
            let (mean, std) = mean_std(&xs);
            assert!((mean - stat.mean).abs() < 1e-9, "{name} mean N={}", agg.top_n);
            assert!((std - stat.std).abs() < 1e-9, "{name} std N={}", agg.top_n);
        }
    }
}
