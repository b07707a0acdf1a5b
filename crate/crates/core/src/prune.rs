//! Edge pruning with an exclusion list.
//!
//! An edge is a *candidate* when its target method's signature is in the
//! list and the target's defining type is a reflexive descendant of one of
//! the origin types listed for that signature. Exhaustive pruning drops every
//! candidate; selective pruning asks a [`PruneDecisionOracle`] per candidate.
//!
//! The node set is never touched, so pruned graphs keep the original node
//! ids. Candidate membership is resolved per node before the edge scan,
//! keeping a prune pass linear in the number of edges.

use std::collections::{HashMap, HashSet};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};
use crate::graph::{CallEdge, CallGraph, MethodNode, MethodSignature, NodeId, TypeHierarchy, TypeId, TypeNode};
use crate::origins::ExclusionList;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Keep,
    Prune,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub verdict: Verdict,
    /// Confidence in `verdict`, in `[0, 1]`.
    pub confidence: f64,
}

impl Decision {
    pub fn keep(confidence: f64) -> Self {
        Decision {
            verdict: Verdict::Keep,
            confidence,
        }
    }

    pub fn prune(confidence: f64) -> Self {
        Decision {
            verdict: Verdict::Prune,
            confidence,
        }
    }
}

/// Everything an oracle may look at for one candidate edge.
#[derive(Debug, Clone, Copy)]
pub struct EdgeContext<'a> {
    pub edge: &'a CallEdge,
    pub source: &'a MethodNode,
    pub target: &'a MethodNode,
    pub source_type: &'a TypeNode,
    pub target_type: &'a TypeNode,
}

#[derive(Debug, Error)]
#[error("oracle failed: {0}")]
pub struct OracleError(pub String);

/// Per-edge keep/prune decision for selective pruning.
///
/// Implementations must be deterministic: the same instance returns the same
/// decision for the same context.
pub trait PruneDecisionOracle {
    fn decide(&self, ctx: &EdgeContext<'_>) -> Result<Decision, OracleError>;
}

/// Never prunes.
#[derive(Debug, Clone, Copy, Default)]
pub struct KeepAll;

impl PruneDecisionOracle for KeepAll {
    fn decide(&self, _: &EdgeContext<'_>) -> Result<Decision, OracleError> {
        Ok(Decision::keep(1.0))
    }
}

/// Prunes every candidate with confidence 1.
#[derive(Debug, Clone, Copy, Default)]
pub struct PruneAll;

impl PruneDecisionOracle for PruneAll {
    fn decide(&self, _: &EdgeContext<'_>) -> Result<Decision, OracleError> {
        Ok(Decision::prune(1.0))
    }
}

/// Looks decisions up by `(source, target, receiver)`; unlisted edges are
/// kept.
#[derive(Debug, Clone, Default)]
pub struct FixedTable {
    decisions: HashMap<(NodeId, NodeId, TypeId), Decision>,
}

impl FixedTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, edge: &CallEdge, decision: Decision) -> Self {
        self.decisions
            .insert((edge.source, edge.target, edge.receiver.clone()), decision);
        self
    }
}

impl PruneDecisionOracle for FixedTable {
    fn decide(&self, ctx: &EdgeContext<'_>) -> Result<Decision, OracleError> {
        let e = ctx.edge;
        Ok(self
            .decisions
            .get(&(e.source, e.target, e.receiver.clone()))
            .copied()
            .unwrap_or(Decision::keep(1.0)))
    }
}

/// Pseudo-random stand-in for a learned model: hashes the edge with a seed
/// into a confidence in `[0, 1)` and votes prune when it is below
/// `prune_rate`, with confidence `1 - hash`.
#[derive(Debug, Clone, Copy)]
pub struct SeededOracle {
    pub seed: u64,
    pub prune_rate: f64,
}

impl SeededOracle {
    fn unit(&self, edge: &CallEdge) -> f64 {
        // FNV-1a over the edge, finished with splitmix64.
        let mut x: u64 = 0xcbf2_9ce4_8422_2325 ^ self.seed;
        let bytes = edge
            .source
            .0
            .to_le_bytes()
            .into_iter()
            .chain(edge.target.0.to_le_bytes())
            .chain(edge.receiver.as_str().bytes());
        for b in bytes {
            x ^= b as u64;
            x = x.wrapping_mul(0x0000_0100_0000_01b3);
        }
        x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
        x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        x ^= x >> 31;
        (x >> 11) as f64 / (1u64 << 53) as f64
    }
}

impl PruneDecisionOracle for SeededOracle {
    fn decide(&self, ctx: &EdgeContext<'_>) -> Result<Decision, OracleError> {
        let u = self.unit(ctx.edge);
        if u < self.prune_rate {
            Ok(Decision::prune(1.0 - u))
        } else {
            Ok(Decision::keep(u))
        }
    }
}

#[derive(Debug, Clone)]
pub struct PruneResult {
    pub graph: CallGraph,
    pub candidate_edges: usize,
    pub pruned_edges: usize,
    /// Candidates kept because the oracle failed on them.
    pub oracle_failures: usize,
    /// `pruned_edges / original edge count`, 0 for an edgeless input.
    pub reduction_ratio: f64,
    pub elapsed: Duration,
}

/// Marks, per node, whether edges into it are pruning candidates.
fn candidate_nodes(cg: &CallGraph, excl: &ExclusionList, h: &TypeHierarchy) -> Result<Vec<bool>> {
    let mut cones: HashMap<&MethodSignature, HashSet<u32>> = HashMap::new();
    for (sig, origin) in excl.entries() {
        let root = h.dense(origin)?;
        cones
            .entry(sig)
            .or_default()
            .extend(h.reflexive_descendants_dense(root));
    }
    cg.nodes()
        .iter()
        .map(|n| {
            Ok(match cones.get(&n.signature) {
                Some(cone) => cone.contains(&h.dense(&n.defining_type)?),
                None => false,
            })
        })
        .collect()
}

/// False iff `target_signature` is listed and `target_type` reflexively
/// descends from one of its listed origin types.
pub fn not_excluded(
    excl: &ExclusionList,
    target_signature: &MethodSignature,
    target_type: &TypeId,
    h: &TypeHierarchy,
) -> Result<bool> {
    let t = h.dense(target_type)?;
    let Some(origins) = excl.origin_types(target_signature) else {
        return Ok(true);
    };
    for origin in origins {
        if h.is_reflexive_descendant_dense(h.dense(origin)?, t) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn finish(cg: &CallGraph, kept: Vec<CallEdge>, candidates: usize, failures: usize, start: Instant) -> PruneResult {
    let pruned = cg.edge_count() - kept.len();
    let graph = cg.with_edges(kept);
    let reduction_ratio = if cg.edge_count() == 0 {
        0.0
    } else {
        pruned as f64 / cg.edge_count() as f64
    };
    PruneResult {
        graph,
        candidate_edges: candidates,
        pruned_edges: pruned,
        oracle_failures: failures,
        reduction_ratio,
        elapsed: start.elapsed(),
    }
}

/// Removes every candidate edge.
pub fn prune_exhaustive(cg: &CallGraph, excl: &ExclusionList, h: &TypeHierarchy) -> Result<PruneResult> {
    let start = Instant::now();
    let candidate = candidate_nodes(cg, excl, h)?;
    let kept: Vec<CallEdge> = cg
        .edges()
        .iter()
        .filter(|e| !candidate[e.target.index()])
        .cloned()
        .collect();
    let candidates = cg.edge_count() - kept.len();
    Ok(finish(cg, kept, candidates, 0, start))
}

/// Removes a candidate edge only when `oracle` votes prune with confidence
/// strictly above `threshold`. Oracle failures keep the edge.
pub fn prune_selective(
    cg: &CallGraph,
    excl: &ExclusionList,
    h: &TypeHierarchy,
    oracle: &dyn PruneDecisionOracle,
    threshold: f64,
) -> Result<PruneResult> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidParams(format!("threshold {threshold} outside [0, 1]")));
    }
    let start = Instant::now();
    let candidate = candidate_nodes(cg, excl, h)?;
    let mut kept = Vec::with_capacity(cg.edge_count());
    let mut candidates = 0;
    let mut failures = 0;
    for edge in cg.edges() {
        if !candidate[edge.target.index()] {
            kept.push(edge.clone());
            continue;
        }
        candidates += 1;
        let source = cg.node(edge.source)?;
        let target = cg.node(edge.target)?;
        let ctx = EdgeContext {
            edge,
            source,
            target,
            source_type: h.lookup(&source.defining_type)?,
            target_type: h.lookup(&target.defining_type)?,
        };
        match oracle.decide(&ctx) {
            Ok(d) if d.verdict == Verdict::Prune && d.confidence > threshold => {}
            Ok(_) => kept.push(edge.clone()),
            Err(err) => {
                log::debug!("keeping {} -> {}: {err}", edge.source, edge.target);
                failures += 1;
                kept.push(edge.clone());
            }
        }
    }
    Ok(finish(cg, kept, candidates, failures, start))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture::{self, m, sig};

    fn next_list() -> ExclusionList {
        let mut l = ExclusionList::new(1);
        l.insert(sig("next"), TypeId::new("T1"));
        l
    }

    fn edge_set(cg: &CallGraph) -> Vec<CallEdge> {
        let mut e = cg.edges().to_vec();
        e.sort();
        e
    }

    #[test]
    fn exhaustive_top1_on_fixture() {
        let (h, cg) = fixture::canonical();
        let r = prune_exhaustive(&cg, &next_list(), &h).unwrap();
        assert_eq!(r.graph.edge_count(), 5);
        assert_eq!(r.pruned_edges, 2);
        assert_eq!(r.candidate_edges, 2);
        assert_eq!(r.reduction_ratio, 2.0 / 7.0);
        assert_eq!(r.graph.nodes(), cg.nodes());
        let run = m(&cg, "T4", "run");
        assert!(r.graph.edges().iter().all(|e| e.source != run));
    }

    #[test]
    fn empty_list_keeps_everything() {
        let (h, cg) = fixture::canonical();
        let r = prune_exhaustive(&cg, &ExclusionList::new(0), &h).unwrap();
        assert_eq!(r.graph, cg);
        assert_eq!(r.reduction_ratio, 0.0);
    }

    #[test]
    fn origin_type_itself_is_excluded() {
        let (h, cg) = fixture::canonical();
        let mut l = ExclusionList::new(1);
        l.insert(sig("run"), TypeId::new("T4"));
        let r = prune_exhaustive(&cg, &l, &h).unwrap();
        assert_eq!(r.graph.edge_count(), 5);
        let run = m(&cg, "T4", "run");
        assert!(r.graph.edges().iter().all(|e| e.target != run));
    }

    #[test]
    fn unknown_origin_type_is_a_lookup_error() {
        let (h, cg) = fixture::canonical();
        let mut l = ExclusionList::new(1);
        l.insert(sig("next"), TypeId::new("T42"));
        assert!(matches!(prune_exhaustive(&cg, &l, &h), Err(Error::UnknownType(_))));
    }

    #[test]
    fn not_excluded_cases() {
        let h = fixture::canonical_hierarchy();
        let l = next_list();
        let t = TypeId::new;
        assert!(!not_excluded(&l, &sig("next"), &t("T3"), &h).unwrap());
        assert!(not_excluded(&l, &sig("run"), &t("T4"), &h).unwrap());
        assert!(!not_excluded(&l, &sig("next"), &t("T1"), &h).unwrap());
        assert!(not_excluded(&l, &sig("next"), &t("T0"), &h).unwrap());
        assert!(not_excluded(&l, &sig("next"), &t("nope"), &h).is_err());
    }

    #[test]
    fn selective_degenerate_oracles() {
        let (h, cg) = fixture::canonical();
        let l = next_list();
        let exhaustive = prune_exhaustive(&cg, &l, &h).unwrap();

        let all = prune_selective(&cg, &l, &h, &PruneAll, 0.95).unwrap();
        assert_eq!(all.graph, exhaustive.graph);
        assert_eq!(all.reduction_ratio, exhaustive.reduction_ratio);

        let none = prune_selective(&cg, &l, &h, &KeepAll, 0.95).unwrap();
        assert_eq!(none.pruned_edges, 0);
        assert_eq!(none.candidate_edges, 2);
        assert_eq!(none.graph, cg);
    }

    #[test]
    fn selective_fixed_table() {
        let (h, cg) = fixture::canonical();
        let cs1a = cg.edges()[0].clone();
        assert_eq!(cs1a.target, m(&cg, "T2", "next"));
        let oracle = FixedTable::new().with(&cs1a, Decision::prune(0.99));
        let r = prune_selective(&cg, &next_list(), &h, &oracle, 0.95).unwrap();
        assert_eq!(r.graph.edge_count(), 6);
        assert!(!r.graph.edges().contains(&cs1a));

        // Confidence must be strictly above the threshold.
        let weak = FixedTable::new().with(&cs1a, Decision::prune(0.95));
        let r = prune_selective(&cg, &next_list(), &h, &weak, 0.95).unwrap();
        assert_eq!(r.graph.edge_count(), 7);
    }

    struct Failing;

    impl PruneDecisionOracle for Failing {
        fn decide(&self, _: &EdgeContext<'_>) -> Result<Decision, OracleError> {
            Err(OracleError("model offline".into()))
        }
    }

    #[test]
    fn oracle_failures_keep_edges() {
        let (h, cg) = fixture::canonical();
        let r = prune_selective(&cg, &next_list(), &h, &Failing, 0.5).unwrap();
        assert_eq!(r.oracle_failures, 2);
        assert_eq!(r.graph, cg);
    }

    #[test]
    fn threshold_is_validated() {
        let (h, cg) = fixture::canonical();
        assert!(prune_selective(&cg, &next_list(), &h, &PruneAll, 1.5).is_err());
        assert!(prune_selective(&cg, &next_list(), &h, &PruneAll, -0.1).is_err());
    }

    #[test]
    fn seeded_oracle_is_deterministic_and_selective() {
        let (h, cg) = fixture::canonical();
        let mut l = ExclusionList::new(5);
        for (s, t) in [
            ("next", "T1"),
            ("run", "T4"),
            ("fmt", "T5"),
            ("helper", "T2"),
            ("hashCode", "T0"),
        ] {
            l.insert(sig(s), TypeId::new(t));
        }
        let oracle = SeededOracle {
            seed: 7,
            prune_rate: 0.5,
        };
        let a = prune_selective(&cg, &l, &h, &oracle, 0.0).unwrap();
        let b = prune_selective(&cg, &l, &h, &oracle, 0.0).unwrap();
        assert_eq!(edge_set(&a.graph), edge_set(&b.graph));
        let always = SeededOracle {
            seed: 7,
            prune_rate: 1.0,
        };
        assert_eq!(
            prune_selective(&cg, &l, &h, &always, 0.0).unwrap().graph.edge_count(),
            0
        );
    }
}
