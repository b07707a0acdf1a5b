//! Artificial vulnerability injection and reverse-reachability propagation.
//!
//! Vulnerable methods are sampled from dependency code with a seeded
//! `ChaCha8Rng` (`rand_chacha`, seeded via `seed_from_u64`) over the eligible
//! nodes in ascending id order. Propagation runs one breadth-first search over
//! reversed call edges per vulnerable node and counts the application methods
//! it reaches. The "paths" metric is the number of reachable
//! `(application node, vulnerable node)` pairs.

use std::collections::{BTreeSet, VecDeque};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CallGraph, NodeId, ReverseAdjacency, TypeHierarchy, TypeNode};

/// Which project is "the application"; everything else is dependency code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectRoleMap {
    pub application_project: String,
    /// Keep core-library methods out of the vulnerable pool.
    #[serde(default = "default_true")]
    pub exclude_core: bool,
}

fn default_true() -> bool {
    true
}

impl ProjectRoleMap {
    pub fn new(application_project: impl Into<String>) -> Self {
        ProjectRoleMap {
            application_project: application_project.into(),
            exclude_core: true,
        }
    }

    pub fn is_application(&self, ty: &TypeNode) -> bool {
        !ty.is_core && ty.project == self.application_project
    }

    /// Fails when no non-core type belongs to the application project.
    pub fn check_application(&self, h: &TypeHierarchy) -> Result<()> {
        if h.types().iter().any(|t| self.is_application(t)) {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!(
                "application project `{}` has no non-core types",
                self.application_project
            )))
        }
    }

    /// Eligible for vulnerability injection.
    pub fn is_dependency(&self, ty: &TypeNode) -> bool {
        !self.is_application(ty) && !(self.exclude_core && ty.is_core)
    }

    fn flags(&self, cg: &CallGraph, h: &TypeHierarchy, pred: impl Fn(&Self, &TypeNode) -> bool) -> Result<Vec<bool>> {
        cg.nodes()
            .iter()
            .map(|n| Ok(pred(self, h.lookup(&n.defining_type)?)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VulnerabilityAssignment {
    pub nodes: BTreeSet<NodeId>,
    pub seed: u64,
    pub requested: usize,
}

/// Dependency nodes in ascending id order.
pub fn eligible_nodes(cg: &CallGraph, h: &TypeHierarchy, roles: &ProjectRoleMap) -> Result<Vec<NodeId>> {
    let flags = roles.flags(cg, h, ProjectRoleMap::is_dependency)?;
    Ok(cg.node_ids().filter(|n| flags[n.index()]).collect())
}

/// Marks `min(k, eligible)` dependency methods as vulnerable, sampled
/// uniformly without replacement.
pub fn inject_artificial_cves(
    cg: &CallGraph,
    h: &TypeHierarchy,
    roles: &ProjectRoleMap,
    k: usize,
    seed: u64,
) -> Result<VulnerabilityAssignment> {
    if k == 0 {
        return Err(Error::InvalidParams(
            "number of vulnerabilities must be positive".into(),
        ));
    }
    let pool = eligible_nodes(cg, h, roles)?;
    if pool.is_empty() {
        return Err(Error::NoEligibleNodes);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amount = k.min(pool.len());
    let nodes = rand::seq::index::sample(&mut rng, pool.len(), amount)
        .into_iter()
        .map(|i| pool[i])
        .collect();
    Ok(VulnerabilityAssignment {
        nodes,
        seed,
        requested: k,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReachabilityResult {
    pub vulnerable: BTreeSet<NodeId>,
    pub reachable_pairs: u64,
    /// Vulnerable nodes reached by at least one application node.
    pub reached_vulnerable: usize,
    pub reachable_vuln_fraction: f64,
    #[serde(with = "secs")]
    pub elapsed: Duration,
}

mod secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let secs = f64::deserialize(d)?;
        Duration::try_from_secs_f64(secs).map_err(serde::de::Error::custom)
    }
}

/// One reachable pair with a concrete call chain from the application node
/// to the vulnerable node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub application: NodeId,
    pub vulnerable: NodeId,
    /// `path[0] == application`, `path.last() == vulnerable`, consecutive
    /// entries are joined by a call edge.
    pub path: Vec<NodeId>,
}

impl Witness {
    /// Checks the path against the forward edges of `cg`.
    pub fn verify(&self, cg: &CallGraph) -> bool {
        self.path.first() == Some(&self.application)
            && self.path.last() == Some(&self.vulnerable)
            && self
                .path
                .windows(2)
                .all(|w| cg.outgoing(w[0]).any(|e| e.target == w[1]))
    }
}

/// Reusable reverse-BFS state; visited marks are generation stamps so a
/// search does not need to clear the arrays.
struct ReverseSearch<'a> {
    rev: &'a ReverseAdjacency,
    stamp: Vec<u32>,
    parent: Vec<NodeId>,
    generation: u32,
    queue: VecDeque<NodeId>,
}

impl<'a> ReverseSearch<'a> {
    fn new(rev: &'a ReverseAdjacency) -> Self {
        let n = rev.node_count();
        ReverseSearch {
            rev,
            stamp: vec![0; n],
            parent: vec![NodeId(0); n],
            generation: 0,
            queue: VecDeque::new(),
        }
    }

    /// Visits every node other than `start` that can reach `start`, once.
    fn run(&mut self, start: NodeId, mut visit: impl FnMut(NodeId)) {
        self.generation += 1;
        let g = self.generation;
        self.stamp[start.index()] = g;
        self.queue.clear();
        self.queue.push_back(start);
        while let Some(n) = self.queue.pop_front() {
            for &p in self.rev.predecessors(n) {
                if self.stamp[p.index()] != g {
                    self.stamp[p.index()] = g;
                    self.parent[p.index()] = n;
                    visit(p);
                    self.queue.push_back(p);
                }
            }
        }
    }

    /// Forward call chain from `from` to `start` of the last search.
    fn path_to_start(&self, from: NodeId, start: NodeId) -> Vec<NodeId> {
        let mut path = vec![from];
        let mut cur = from;
        while cur != start {
            cur = self.parent[cur.index()];
            path.push(cur);
        }
        path
    }
}

fn check_assignment(cg: &CallGraph, assignment: &VulnerabilityAssignment) -> Result<()> {
    match assignment.nodes.iter().find(|n| n.index() >= cg.node_count()) {
        Some(&n) => Err(Error::UnknownNode(n)),
        None => Ok(()),
    }
}

/// Reverse BFS from every vulnerable node. `elapsed` covers the searches
/// only, not building the reversed adjacency.
pub fn propagate(
    cg: &CallGraph,
    h: &TypeHierarchy,
    assignment: &VulnerabilityAssignment,
    roles: &ProjectRoleMap,
) -> Result<ReachabilityResult> {
    check_assignment(cg, assignment)?;
    let app = roles.flags(cg, h, ProjectRoleMap::is_application)?;
    let rev = cg.reverse_adjacency();
    let mut search = ReverseSearch::new(&rev);

    let start = Instant::now();
    let mut pairs = 0u64;
    let mut reached = 0usize;
    for &v in &assignment.nodes {
        let mut hits = 0u64;
        search.run(v, |n| {
            if app[n.index()] {
                hits += 1;
            }
        });
        pairs += hits;
        reached += usize::from(hits > 0);
    }
    let elapsed = start.elapsed();

    let fraction = if assignment.nodes.is_empty() {
        0.0
    } else {
        reached as f64 / assignment.nodes.len() as f64
    };
    Ok(ReachabilityResult {
        vulnerable: assignment.nodes.clone(),
        reachable_pairs: pairs,
        reached_vulnerable: reached,
        reachable_vuln_fraction: fraction,
        elapsed,
    })
}

/// Every reachable pair with a shortest witness chain, ordered by
/// `(vulnerable, application)`.
pub fn witnesses(
    cg: &CallGraph,
    h: &TypeHierarchy,
    assignment: &VulnerabilityAssignment,
    roles: &ProjectRoleMap,
) -> Result<Vec<Witness>> {
    check_assignment(cg, assignment)?;
    let app = roles.flags(cg, h, ProjectRoleMap::is_application)?;
    let rev = cg.reverse_adjacency();
    let mut search = ReverseSearch::new(&rev);
    let mut out = Vec::new();
    for &v in &assignment.nodes {
        let mut hits = Vec::new();
        search.run(v, |n| {
            if app[n.index()] {
                hits.push(n);
            }
        });
        hits.sort();
        for a in hits {
            out.push(Witness {
                application: a,
                vulnerable: v,
                path: search.path_to_start(a, v),
            });
        }
    }
    Ok(out)
}

/// Warm-up and repetition counts for timed measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimingConfig {
    pub warmup: u32,
    pub repetitions: u32,
}

impl Default for TimingConfig {
    fn default() -> Self {
        TimingConfig {
            warmup: 1,
            repetitions: 3,
        }
    }
}

/// [`propagate`] after `warmup` discarded runs, reporting the mean elapsed
/// time of `repetitions` measured runs.
pub fn propagate_timed(
    cg: &CallGraph,
    h: &TypeHierarchy,
    assignment: &VulnerabilityAssignment,
    roles: &ProjectRoleMap,
    timing: TimingConfig,
) -> Result<ReachabilityResult> {
    for _ in 0..timing.warmup {
        propagate(cg, h, assignment, roles)?;
    }
    let reps = timing.repetitions.max(1);
    let mut total = Duration::ZERO;
    let mut last = None;
    for _ in 0..reps {
        let r = propagate(cg, h, assignment, roles)?;
        total += r.elapsed;
        last = Some(r);
    }
    let mut result = last.expect("at least one repetition");
    result.elapsed = total / reps;
    Ok(result)
}

/// Pruned-minus-base differences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaReport {
    pub pair_delta: i64,
    pub fraction_delta: f64,
    pub elapsed_delta_secs: f64,
    /// `base.elapsed / pruned.elapsed`; infinite when the pruned run took no
    /// measurable time.
    pub speedup: f64,
}

pub fn compare(base: &ReachabilityResult, pruned: &ReachabilityResult) -> Result<DeltaReport> {
    if base.vulnerable != pruned.vulnerable {
        return Err(Error::MismatchedAssignments);
    }
    let b = base.elapsed.as_secs_f64();
    let p = pruned.elapsed.as_secs_f64();
    Ok(DeltaReport {
        pair_delta: pruned.reachable_pairs as i64 - base.reachable_pairs as i64,
        fraction_delta: pruned.reachable_vuln_fraction - base.reachable_vuln_fraction,
        elapsed_delta_secs: p - b,
        speedup: if p > 0.0 {
            b / p
        } else if b > 0.0 {
            f64::INFINITY
        } else {
            1.0
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture::{self, m, sig};
    use crate::graph::TypeId;
    use crate::origins::ExclusionList;
    use crate::prune::prune_exhaustive;

    fn roles() -> ProjectRoleMap {
        ProjectRoleMap::new(fixture::APPLICATION_PROJECT)
    }

    #[test]
    fn unknown_application_project() {
        let h = fixture::canonical_hierarchy();
        assert!(roles().check_application(&h).is_ok());
        assert!(matches!(
            ProjectRoleMap::new("jre").check_application(&h),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn fixture_has_one_eligible_node() {
        let (h, cg) = fixture::canonical();
        let t3 = m(&cg, "T3", "next");
        for seed in [0, 1, 99, u64::MAX] {
            let a = inject_artificial_cves(&cg, &h, &roles(), 1, seed).unwrap();
            assert_eq!(a.nodes, BTreeSet::from([t3]));
        }
        let a = inject_artificial_cves(&cg, &h, &roles(), 100, 5).unwrap();
        assert_eq!(a.nodes, BTreeSet::from([t3]));
        assert_eq!(a.requested, 100);
    }

    #[test]
    fn core_can_be_made_eligible() {
        let (h, cg) = fixture::canonical();
        let roles = ProjectRoleMap {
            exclude_core: false,
            ..roles()
        };
        assert_eq!(eligible_nodes(&cg, &h, &roles).unwrap().len(), 5);
    }

    #[test]
    fn errors_on_empty_pool_and_zero_k() {
        let (h, cg) = fixture::canonical();
        let everything_app = ProjectRoleMap::new("lib");
        // "lib" as application leaves only app-project nodes, which are eligible.
        assert!(inject_artificial_cves(&cg, &h, &everything_app, 1, 0).is_ok());
        let only_app = fixture::canonical_types()
            .into_iter()
            .map(|mut t| {
                if !t.is_core {
                    t.project = "app".into();
                }
                t
            })
            .collect();
        let h2 = TypeHierarchy::new("jre", only_app).unwrap();
        let cg2 = CallGraph::from_parts(&h2, cg.nodes().to_vec(), cg.edges().to_vec()).unwrap();
        assert!(matches!(
            inject_artificial_cves(&cg2, &h2, &roles(), 1, 0),
            Err(Error::NoEligibleNodes)
        ));
        assert!(inject_artificial_cves(&cg, &h, &roles(), 0, 0).is_err());
    }

    #[test]
    fn fixture_reachability_before_and_after_pruning() {
        let (h, cg) = fixture::canonical();
        let a = inject_artificial_cves(&cg, &h, &roles(), 1, 3).unwrap();
        let base = propagate(&cg, &h, &a, &roles()).unwrap();
        assert_eq!(base.reachable_pairs, 2);
        assert_eq!(base.reachable_vuln_fraction, 1.0);

        let mut l = ExclusionList::new(1);
        l.insert(sig("next"), TypeId::new("T1"));
        let pruned_cg = prune_exhaustive(&cg, &l, &h).unwrap().graph;
        let pruned = propagate(&pruned_cg, &h, &a, &roles()).unwrap();
        assert_eq!(pruned.reachable_pairs, 0);
        assert_eq!(pruned.reachable_vuln_fraction, 0.0);

        let d = compare(&base, &pruned).unwrap();
        assert_eq!(d.pair_delta, -2);
        assert_eq!(d.fraction_delta, -1.0);
    }

    #[test]
    fn fixture_witnesses() {
        let (h, cg) = fixture::canonical();
        let a = inject_artificial_cves(&cg, &h, &roles(), 1, 3).unwrap();
        let w = witnesses(&cg, &h, &a, &roles()).unwrap();
        let t3 = m(&cg, "T3", "next");
        let run = m(&cg, "T4", "run");
        let use_ = m(&cg, "T4", "use");
        assert_eq!(w.len(), 2);
        let by_app = |n| w.iter().find(|x| x.application == n).unwrap();
        assert_eq!(by_app(run).path, vec![run, t3]);
        assert_eq!(by_app(use_).path, vec![use_, run, t3]);
        assert!(w.iter().all(|x| x.verify(&cg)));
        assert!(!Witness {
            application: use_,
            vulnerable: t3,
            path: vec![use_, t3]
        }
        .verify(&cg));
    }

    #[test]
    fn isolated_vulnerable_node() {
        let (h, cg) = fixture::canonical();
        let a = VulnerabilityAssignment {
            nodes: BTreeSet::from([m(&cg, "T1", "hasNext")]),
            seed: 0,
            requested: 1,
        };
        let r = propagate(&cg, &h, &a, &roles()).unwrap();
        assert_eq!(r.reachable_pairs, 0);
        assert_eq!(r.reachable_vuln_fraction, 0.0);
    }

    #[test]
    fn unknown_assignment_node() {
        let (h, cg) = fixture::canonical();
        let a = VulnerabilityAssignment {
            nodes: BTreeSet::from([NodeId(99)]),
            seed: 0,
            requested: 1,
        };
        assert!(matches!(propagate(&cg, &h, &a, &roles()), Err(Error::UnknownNode(_))));
    }

    fn result(pairs: u64, fraction: f64, ms: u64) -> ReachabilityResult {
        ReachabilityResult {
            vulnerable: BTreeSet::from([NodeId(1)]),
            reachable_pairs: pairs,
            reached_vulnerable: (fraction > 0.0) as usize,
            reachable_vuln_fraction: fraction,
            elapsed: Duration::from_millis(ms),
        }
    }

    #[test]
    fn compare_deltas() {
        let same = compare(&result(2, 1.0, 10), &result(2, 1.0, 10)).unwrap();
        assert_eq!(same.pair_delta, 0);
        assert_eq!(same.fraction_delta, 0.0);
        assert_eq!(same.elapsed_delta_secs, 0.0);
        assert_eq!(same.speedup, 1.0);

        let faster = compare(&result(2, 1.0, 10), &result(2, 1.0, 5)).unwrap();
        assert_eq!(faster.speedup, 2.0);

        let mut other = result(2, 1.0, 10);
        other.vulnerable = BTreeSet::from([NodeId(2)]);
        assert!(matches!(
            compare(&result(2, 1.0, 10), &other),
            Err(Error::MismatchedAssignments)
        ));
    }

    #[test]
    fn timed_propagation_matches_counts() {
        let (h, cg) = fixture::canonical();
        let a = inject_artificial_cves(&cg, &h, &roles(), 1, 3).unwrap();
        let plain = propagate(&cg, &h, &a, &roles()).unwrap();
        let timed = propagate_timed(&cg, &h, &a, &roles(), TimingConfig::default()).unwrap();
        assert_eq!(plain.reachable_pairs, timed.reachable_pairs);
        assert_eq!(plain.vulnerable, timed.vulnerable);
    }
}
