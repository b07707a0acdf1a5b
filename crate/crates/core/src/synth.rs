//! Seeded synthetic hierarchies and CHA-expanded call graphs.
//!
//! All randomness comes from one `ChaCha8Rng` stream (`rand_chacha`,
//! `seed_from_u64(params.seed)`): first the hierarchy (parents, then
//! declarations, type by type), then the call sites. The interchange files
//! written from a generated corpus are the portable artifact; the stream
//! order is only stable within this implementation.
//!
//! Types are generated in index order and only pick parents with a smaller
//! index, so the hierarchy is acyclic by construction. Core-library types
//! come first and only extend other core types.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CallEdge, CallGraph, MethodNode, MethodSignature, NodeId, TypeHierarchy, TypeId, TypeNode};
use crate::origins::{OriginMap, OriginRef};

pub const CORE_PROJECT: &str = "jre";
/// Project id of the generated application; the other projects are its
/// dependencies.
pub const APPLICATION_PROJECT: &str = "p0";

/// Chance that a type introduces a signature none of its ancestors declares.
const FRESH_DECLARATION_PROBABILITY: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenParams {
    pub type_count: usize,
    pub max_parents_per_type: usize,
    pub signature_pool_size: usize,
    /// Chance that a type redeclares an inherited signature.
    pub override_probability: f64,
    /// Inclusive `[min, max]` number of call sites per method.
    pub call_sites_per_method: (usize, usize),
    pub project_count: usize,
    pub core_type_fraction: f64,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            type_count: 100,
            max_parents_per_type: 2,
            signature_pool_size: 8,
            override_probability: 0.5,
            call_sites_per_method: (1, 4),
            project_count: 3,
            core_type_fraction: 0.1,
            seed: 0,
        }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("type_count", self.type_count),
            ("max_parents_per_type", self.max_parents_per_type),
            ("signature_pool_size", self.signature_pool_size),
            ("project_count", self.project_count),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::InvalidParams(format!("{name} must be positive")));
            }
        }
        for (name, p) in [
            ("override_probability", self.override_probability),
            ("core_type_fraction", self.core_type_fraction),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParams(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        let (lo, hi) = self.call_sites_per_method;
        if lo > hi {
            return Err(Error::InvalidParams(format!("call site range [{lo}, {hi}] is empty")));
        }
        Ok(())
    }

    fn core_count(&self) -> usize {
        ((self.core_type_fraction * self.type_count as f64).round() as usize).min(self.type_count)
    }
}

fn type_id(i: usize, width: usize) -> String {
    format!("T{i:0width$}")
}

fn pool_signature(k: usize) -> MethodSignature {
    let params = vec!["int"; k % 3];
    let ret = if k.is_multiple_of(2) {
        "java.lang.Object"
    } else {
        "void"
    };
    MethodSignature::new(format!("m{k}"), params, ret).expect("generated signature is well formed")
}

/// A whole corpus entry: hierarchy plus CHA call graph from one seed.
pub fn generate(p: &GenParams) -> Result<(TypeHierarchy, CallGraph)> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let h = hierarchy_from(p, &mut rng)?;
    let cg = call_graph_from(&h, p, &mut rng)?;
    Ok((h, cg))
}

pub fn generate_hierarchy(p: &GenParams) -> Result<TypeHierarchy> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    hierarchy_from(p, &mut rng)
}

/// CHA call graph over `h`, using a stream seeded from `p.seed` only for the
/// call sites. [`generate`] continues the hierarchy's stream instead.
pub fn generate_call_graph_cha(h: &TypeHierarchy, p: &GenParams) -> Result<CallGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed ^ 0x5eed_ca11_9a4b_0000);
    call_graph_from(h, p, &mut rng)
}

fn hierarchy_from(p: &GenParams, rng: &mut ChaCha8Rng) -> Result<TypeHierarchy> {
    p.validate()?;
    let n = p.type_count;
    let width = (n - 1).to_string().len();
    let core = p.core_count();
    let pool: Vec<MethodSignature> = (0..p.signature_pool_size).map(pool_signature).collect();

    let mut types = Vec::with_capacity(n);
    // Signatures visible (declared by some strict ancestor) per type.
    let mut inherited: Vec<BTreeSet<usize>> = Vec::with_capacity(n);
    let mut declared_idx: Vec<BTreeSet<usize>> = Vec::with_capacity(n);

    for i in 0..n {
        let is_core = i < core;
        let parents: Vec<usize> = if i == 0 {
            Vec::new()
        } else {
            // Core types occupy the lowest indices, so a core type's
            // candidates are all core.
            let wanted = rng.random_range(1..=p.max_parents_per_type).min(i);
            let mut ps: Vec<usize> = index::sample(rng, i, wanted).into_vec();
            ps.sort_unstable();
            ps
        };

        let mut visible = BTreeSet::new();
        for &q in &parents {
            visible.extend(inherited[q].iter().copied());
            visible.extend(declared_idx[q].iter().copied());
        }
        let mut declares = BTreeSet::new();
        for k in 0..pool.len() {
            let roll: f64 = rng.random();
            let chance = if visible.contains(&k) {
                p.override_probability
            } else {
                FRESH_DECLARATION_PROBABILITY
            };
            if roll < chance {
                declares.insert(k);
            }
        }

        let (project, package, fq) = if is_core {
            let pkg = format!("java.g{}", i % 4);
            (CORE_PROJECT.to_string(), pkg.clone(), format!("{pkg}.C{i}"))
        } else {
            let proj = rng.random_range(0..p.project_count);
            let pkg = format!("org.p{proj}.k{}", rng.random_range(0..3));
            (format!("p{proj}"), pkg.clone(), format!("{pkg}.C{i}"))
        };

        let mut node = TypeNode::new(type_id(i, width), fq)
            .in_project(project, package)
            .with_parents(parents.iter().map(|&q| type_id(q, width)))
            .declaring(declares.iter().map(|&k| pool[k].clone()));
        node.is_core = is_core;
        types.push(node);
        inherited.push(visible);
        declared_idx.push(declares);
    }
    TypeHierarchy::new(CORE_PROJECT, types)
}

fn call_graph_from(h: &TypeHierarchy, p: &GenParams, rng: &mut ChaCha8Rng) -> Result<CallGraph> {
    p.validate()?;
    let mut nodes = Vec::new();
    let mut index_of: HashMap<(u32, &MethodSignature), NodeId> = HashMap::new();
    for ty in h.types() {
        let t = h.dense(&ty.id)?;
        for sig in &ty.declared {
            let id = NodeId(nodes.len() as u32);
            nodes.push(MethodNode::new(ty.id.clone(), sig.clone()));
            index_of.insert((t, sig), id);
        }
    }

    let mut expansion: HashMap<usize, Vec<NodeId>> = HashMap::new();
    let mut edges = Vec::new();
    let (lo, hi) = p.call_sites_per_method;
    for src in 0..nodes.len() {
        let sites = rng.random_range(lo..=hi).min(nodes.len());
        for site in index::sample(rng, nodes.len(), sites) {
            let receiver = &nodes[site];
            let targets = expansion.entry(site).or_insert_with(|| {
                let r = h.dense(&receiver.defining_type).expect("generated type");
                h.reflexive_descendants_dense(r)
                    .into_iter()
                    .filter_map(|d| index_of.get(&(d, &receiver.signature)).copied())
                    .collect()
            });
            for &target in targets.iter() {
                edges.push(CallEdge {
                    source: NodeId(src as u32),
                    target,
                    receiver: receiver.defining_type.clone(),
                });
            }
        }
    }
    CallGraph::from_parts(h, nodes, edges)
}

/// Origins by exhaustive enumeration, written independently of
/// [`crate::origins::find_origins`].
///
/// For each target, every reflexive ancestor is found with its shortest
/// distance by fixpoint relaxation over raw parent lists. Candidates are the
/// ancestors declaring the signature whose own ancestor sets contain no
/// declarer; the smallest `(distance, typeId)` wins.
pub fn brute_force_origins(cg: &CallGraph, h: &TypeHierarchy) -> Result<OriginMap> {
    let mut distances: HashMap<TypeId, BTreeMap<TypeId, usize>> = HashMap::new();
    let mut origins = OriginMap::new();

    let mut targets: Vec<NodeId> = cg.edges().iter().map(|e| e.target).collect();
    targets.sort();
    targets.dedup();

    for target in targets {
        let node = cg.node(target)?;
        let sig = &node.signature;
        let up = reflexive_ancestor_distances(h, &node.defining_type, &mut distances)?;
        let mut candidates: Vec<(usize, TypeId)> = Vec::new();
        for (ty, dist) in &up {
            if !h.lookup(ty)?.declared.iter().any(|s| s == sig) {
                continue;
            }
            let above = reflexive_ancestor_distances(h, ty, &mut distances)?;
            let shadowed = above
                .keys()
                .filter(|a| *a != ty)
                .map(|a| h.lookup(a))
                .collect::<Result<Vec<_>>>()?
                .iter()
                .any(|a| a.declared.iter().any(|s| s == sig));
            if !shadowed {
                candidates.push((*dist, ty.clone()));
            }
        }
        candidates.sort();
        let chosen = candidates
            .first()
            .map(|(_, t)| t.clone())
            .ok_or_else(|| Error::InvalidCallGraph(format!("no declaration of {sig} above node {target}")))?;
        origins.insert(
            target,
            OriginRef::new(chosen, sig.clone()),
            candidates.into_iter().map(|(_, t)| t).collect(),
        );
    }
    Ok(origins)
}

fn reflexive_ancestor_distances(
    h: &TypeHierarchy,
    start: &TypeId,
    memo: &mut HashMap<TypeId, BTreeMap<TypeId, usize>>,
) -> Result<BTreeMap<TypeId, usize>> {
    if let Some(d) = memo.get(start) {
        return Ok(d.clone());
    }
    let mut dist = BTreeMap::from([(start.clone(), 0usize)]);
    loop {
        let mut changed = false;
        let snapshot: Vec<(TypeId, usize)> = dist.iter().map(|(k, v)| (k.clone(), *v)).collect();
        for (ty, d) in snapshot {
            for parent in &h.lookup(&ty)?.parents {
                let slot = dist.entry(parent.clone()).or_insert(usize::MAX);
                if d + 1 < *slot {
                    *slot = d + 1;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    memo.insert(start.clone(), dist.clone());
    Ok(dist)
}
