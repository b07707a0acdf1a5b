//! Origin methods: for every call target, the declaration that first
//! introduced its signature in the type hierarchy.
//!
//! Frequencies are counted per call edge. Top-N rows of the frequency table
//! become an [`ExclusionList`] for pruning.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CallGraph, MethodSignature, NodeId, TypeHierarchy, TypeId};

/// The first declaration of a signature: no strict ancestor of
/// `origin_type` declares `signature`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OriginRef {
    pub origin_type: TypeId,
    pub signature: MethodSignature,
}

impl OriginRef {
    pub fn new(origin_type: impl Into<TypeId>, signature: MethodSignature) -> Self {
        OriginRef {
            origin_type: origin_type.into(),
            signature,
        }
    }
}

impl fmt::Display for OriginRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.origin_type, self.signature)
    }
}

/// Origin of every edge target in a call graph.
///
/// When several unrelated types independently introduce a target's
/// signature, the one with the smallest `(depth, typeId)` key relative to the
/// target's type is chosen and the full candidate list is kept in
/// [`OriginMap::ambiguities`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OriginMap {
    entries: BTreeMap<NodeId, OriginRef>,
    ambiguous: BTreeMap<NodeId, Vec<TypeId>>,
}

impl OriginMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records the chosen origin of `node`. `candidates` lists every minimal
    /// first-declarer in tie-break order; lists of length one are not kept.
    pub fn insert(&mut self, node: NodeId, origin: OriginRef, candidates: Vec<TypeId>) {
        if candidates.len() > 1 {
            self.ambiguous.insert(node, candidates);
        } else {
            self.ambiguous.remove(&node);
        }
        self.entries.insert(node, origin);
    }

    pub fn get(&self, node: NodeId) -> Option<&OriginRef> {
        self.entries.get(&node)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &OriginRef)> + '_ {
        self.entries.iter().map(|(k, v)| (*k, v))
    }

    /// Nodes with more than one independent first-declarer, with the full
    /// candidate list.
    pub fn ambiguities(&self) -> &BTreeMap<NodeId, Vec<TypeId>> {
        &self.ambiguous
    }

    /// The entries for `nodes` only.
    pub fn restrict(&self, nodes: &[NodeId]) -> OriginMap {
        let mut out = OriginMap::new();
        for n in nodes {
            if let Some(o) = self.entries.get(n) {
                out.entries.insert(*n, o.clone());
                if let Some(c) = self.ambiguous.get(n) {
                    out.ambiguous.insert(*n, c.clone());
                }
            }
        }
        out
    }

    /// Derivative nodes of `origin`, ascending.
    pub fn derivatives_of(&self, origin: &OriginRef) -> Vec<NodeId> {
        self.entries
            .iter()
            .filter(|(_, o)| *o == origin)
            .map(|(n, _)| *n)
            .collect()
    }
}

/// Maps every distinct edge target to its origin declaration.
pub fn find_origins(cg: &CallGraph, h: &TypeHierarchy) -> Result<OriginMap> {
    let mut first_declarer: HashMap<(u32, &MethodSignature), bool> = HashMap::new();
    let mut resolved: HashMap<(u32, &MethodSignature), (u32, Vec<u32>)> = HashMap::new();
    let mut origins = OriginMap::new();

    for target in cg.targets() {
        let node = cg.node(target)?;
        let ty = h.dense(&node.defining_type)?;
        let sig = &node.signature;

        let (chosen, candidates) = resolved
            .entry((ty, sig))
            .or_insert_with(|| {
                let declares = |t: u32| h.type_at(t).declares(sig);
                let mut is_first = |t: u32| {
                    *first_declarer
                        .entry((t, sig))
                        .or_insert_with(|| declares(t) && !h.ancestors_dense(t).iter().any(|&a| declares(a)))
                };
                // Reflexive ancestors are already in (depth, typeId) order.
                let candidates: Vec<u32> = std::iter::once(ty)
                    .chain(h.ancestors_dense(ty).iter().copied())
                    .filter(|&t| is_first(t))
                    .collect();
                (candidates[0], candidates)
            })
            .clone();

        origins.insert(
            target,
            OriginRef::new(h.type_at(chosen).id.clone(), sig.clone()),
            candidates.iter().map(|&c| h.type_at(c).id.clone()).collect(),
        );
    }
    if !origins.ambiguities().is_empty() {
        log::debug!(
            "{} targets have more than one first-declarer",
            origins.ambiguities().len()
        );
    }
    Ok(origins)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OriginFrequency {
    pub origin: OriginRef,
    pub edge_count: u64,
}

/// Origins ranked by how many call edges they cause, descending; ties are
/// broken by `(originType, signature)`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OriginFrequencyTable {
    pub rows: Vec<OriginFrequency>,
}

impl OriginFrequencyTable {
    pub fn total_edges(&self) -> u64 {
        self.rows.iter().map(|r| r.edge_count).sum()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn top(&self, n: usize) -> &[OriginFrequency] {
        &self.rows[..n.min(self.rows.len())]
    }

    /// Share of all edges caused by the first row, 0 for an empty table.
    pub fn top_share(&self) -> f64 {
        match (self.rows.first(), self.total_edges()) {
            (Some(first), total) if total > 0 => first.edge_count as f64 / total as f64,
            _ => 0.0,
        }
    }
}

pub fn origin_edge_frequencies(cg: &CallGraph, origins: &OriginMap) -> Result<OriginFrequencyTable> {
    let mut counts: BTreeMap<&OriginRef, u64> = BTreeMap::new();
    for e in cg.edges() {
        let origin = origins.get(e.target).ok_or(Error::MissingOrigin(e.target))?;
        *counts.entry(origin).or_default() += 1;
    }
    let mut rows: Vec<OriginFrequency> = counts
        .into_iter()
        .map(|(origin, edge_count)| OriginFrequency {
            origin: origin.clone(),
            edge_count,
        })
        .collect();
    // Stable sort keeps the BTreeMap's (originType, signature) order on ties.
    rows.sort_by_key(|r| std::cmp::Reverse(r.edge_count));
    Ok(OriginFrequencyTable { rows })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivativeCount {
    pub origin: OriginRef,
    pub derivatives: u64,
}

/// Number of distinct methods mapped to each origin, descending, with the
/// frequency table's tie-break.
pub fn unique_derivative_counts(origins: &OriginMap) -> Vec<DerivativeCount> {
    let mut counts: BTreeMap<&OriginRef, u64> = BTreeMap::new();
    for (_, origin) in origins.iter() {
        *counts.entry(origin).or_default() += 1;
    }
    let mut rows: Vec<DerivativeCount> = counts
        .into_iter()
        .map(|(origin, derivatives)| DerivativeCount {
            origin: origin.clone(),
            derivatives,
        })
        .collect();
    rows.sort_by_key(|r| std::cmp::Reverse(r.derivatives));
    rows
}

/// Signatures mapped to the origin types whose derivatives are pruning
/// candidates.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExclusionList {
    by_signature: BTreeMap<MethodSignature, BTreeSet<TypeId>>,
    declared_size: usize,
}

impl ExclusionList {
    pub fn new(declared_size: usize) -> Self {
        ExclusionList {
            by_signature: BTreeMap::new(),
            declared_size,
        }
    }

    pub fn insert(&mut self, signature: MethodSignature, origin_type: TypeId) {
        self.by_signature.entry(signature).or_default().insert(origin_type);
    }

    /// The N the list was built for.
    pub fn declared_size(&self) -> usize {
        self.declared_size
    }

    /// Number of (signature, origin type) entries.
    pub fn len(&self) -> usize {
        self.by_signature.values().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.by_signature.is_empty()
    }

    pub fn origin_types(&self, signature: &MethodSignature) -> Option<&BTreeSet<TypeId>> {
        self.by_signature.get(signature)
    }

    pub fn contains(&self, signature: &MethodSignature, origin_type: &TypeId) -> bool {
        self.by_signature
            .get(signature)
            .is_some_and(|types| types.contains(origin_type))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&MethodSignature, &TypeId)> + '_ {
        self.by_signature
            .iter()
            .flat_map(|(sig, types)| types.iter().map(move |t| (sig, t)))
    }
}

/// The first `min(n, rows)` rows of `table`, grouped by signature.
pub fn build_exclusion_list(table: &OriginFrequencyTable, n: usize) -> ExclusionList {
    let mut list = ExclusionList::new(n);
    for row in table.top(n) {
        list.insert(row.origin.signature.clone(), row.origin.origin_type.clone());
    }
    list
}
