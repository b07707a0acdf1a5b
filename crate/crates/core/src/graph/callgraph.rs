use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{MethodSignature, TypeHierarchy, TypeId};
use crate::error::{Error, Result};

/// Stable identifier of a method node. Pruned graphs reuse the ids of the
/// graph they were derived from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A method: the type whose body defines it plus its signature.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MethodNode {
    pub defining_type: TypeId,
    pub signature: MethodSignature,
}

impl MethodNode {
    pub fn new(defining_type: impl Into<TypeId>, signature: MethodSignature) -> Self {
        MethodNode {
            defining_type: defining_type.into(),
            signature,
        }
    }
}

impl fmt::Display for MethodNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.defining_type, self.signature)
    }
}

/// A resolved call: `source` may invoke `target` through a receiver whose
/// static type is `receiver`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CallEdge {
    pub source: NodeId,
    pub target: NodeId,
    pub receiver: TypeId,
}

#[derive(Debug)]
struct NodeTable {
    nodes: Vec<MethodNode>,
    index: HashMap<MethodNode, NodeId>,
}

/// Method nodes plus call edges, validated against a [`TypeHierarchy`].
///
/// At most one edge exists per `(source, target, receiver)` triple. Edge
/// order is the insertion order of the first occurrence of each triple and is
/// preserved by pruning. The node table is shared between a graph and every
/// graph derived from it by edge filtering.
#[derive(Debug, Clone)]
pub struct CallGraph {
    table: Arc<NodeTable>,
    edges: Vec<CallEdge>,
    out_offsets: Vec<u32>,
    out_edges: Vec<u32>,
    duplicates: usize,
}

impl PartialEq for CallGraph {
    fn eq(&self, other: &Self) -> bool {
        self.table.nodes == other.table.nodes && self.edges == other.edges
    }
}

impl Eq for CallGraph {}

impl CallGraph {
    /// Builds a graph from explicit parts; node `i` receives id `i`.
    /// Duplicate edge triples are collapsed and counted.
    pub fn from_parts(h: &TypeHierarchy, nodes: Vec<MethodNode>, edges: Vec<CallEdge>) -> Result<Self> {
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, node) in nodes.iter().enumerate() {
            let ty = h.lookup(&node.defining_type)?;
            if !ty.declares(&node.signature) {
                return Err(Error::InvalidCallGraph(format!(
                    "node {i} ({node}): type `{}` does not declare `{}`",
                    node.defining_type, node.signature
                )));
            }
            if index.insert(node.clone(), NodeId(i as u32)).is_some() {
                return Err(Error::InvalidCallGraph(format!("node {i} ({node}) is listed twice")));
            }
        }

        let mut seen = HashSet::with_capacity(edges.len());
        let mut unique = Vec::with_capacity(edges.len());
        let mut duplicates = 0;
        for edge in edges {
            for end in [edge.source, edge.target] {
                if end.index() >= nodes.len() {
                    return Err(Error::UnknownNode(end));
                }
            }
            h.lookup(&edge.receiver)?;
            if seen.insert(edge.clone()) {
                unique.push(edge);
            } else {
                duplicates += 1;
            }
        }
        if duplicates > 0 {
            log::warn!("collapsed {duplicates} duplicate call edges");
        }

        let table = Arc::new(NodeTable { nodes, index });
        let mut graph = CallGraph::with_table(table, unique);
        graph.duplicates = duplicates;
        Ok(graph)
    }

    fn with_table(table: Arc<NodeTable>, edges: Vec<CallEdge>) -> Self {
        let n = table.nodes.len();
        let mut out_offsets = vec![0u32; n + 1];
        for e in &edges {
            out_offsets[e.source.index() + 1] += 1;
        }
        for i in 0..n {
            out_offsets[i + 1] += out_offsets[i];
        }
        let mut cursor = out_offsets.clone();
        let mut out_edges = vec![0u32; edges.len()];
        for (i, e) in edges.iter().enumerate() {
            let slot = &mut cursor[e.source.index()];
            out_edges[*slot as usize] = i as u32;
            *slot += 1;
        }
        CallGraph {
            table,
            edges,
            out_offsets,
            out_edges,
            duplicates: 0,
        }
    }

    /// Same node set, different edges. The caller guarantees `edges` only
    /// reference existing nodes (used for subsets of `self.edges()`).
    pub(crate) fn with_edges(&self, edges: Vec<CallEdge>) -> Self {
        CallGraph::with_table(Arc::clone(&self.table), edges)
    }

    pub fn node_count(&self) -> usize {
        self.table.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Number of duplicate edges collapsed while building this graph.
    pub fn collapsed_duplicates(&self) -> usize {
        self.duplicates
    }

    pub fn nodes(&self) -> &[MethodNode] {
        &self.table.nodes
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.table.nodes.len() as u32).map(NodeId)
    }

    pub fn node(&self, id: NodeId) -> Result<&MethodNode> {
        self.table.nodes.get(id.index()).ok_or(Error::UnknownNode(id))
    }

    pub fn find(&self, defining_type: &TypeId, signature: &MethodSignature) -> Option<NodeId> {
        self.table
            .index
            .get(&MethodNode {
                defining_type: defining_type.clone(),
                signature: signature.clone(),
            })
            .copied()
    }

    pub fn edges(&self) -> &[CallEdge] {
        &self.edges
    }

    /// Outgoing edges of `id`, in graph edge order.
    pub fn outgoing(&self, id: NodeId) -> impl Iterator<Item = &CallEdge> + '_ {
        let (lo, hi) = match (self.out_offsets.get(id.index()), self.out_offsets.get(id.index() + 1)) {
            (Some(&lo), Some(&hi)) => (lo as usize, hi as usize),
            _ => (0, 0),
        };
        self.out_edges[lo..hi].iter().map(move |&e| &self.edges[e as usize])
    }

    /// Distinct edge targets in ascending id order.
    pub fn targets(&self) -> Vec<NodeId> {
        let mut seen = vec![false; self.node_count()];
        for e in &self.edges {
            seen[e.target.index()] = true;
        }
        seen.iter()
            .enumerate()
            .filter(|(_, s)| **s)
            .map(|(i, _)| NodeId(i as u32))
            .collect()
    }

    pub fn reverse_adjacency(&self) -> ReverseAdjacency {
        ReverseAdjacency::new(self)
    }
}

/// Incremental construction of a [`CallGraph`] keyed by methods rather than
/// by raw ids.
#[derive(Debug, Default)]
pub struct CallGraphBuilder {
    nodes: Vec<MethodNode>,
    index: HashMap<MethodNode, NodeId>,
    edges: Vec<CallEdge>,
}

impl CallGraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id of the method, adding it on first sight.
    pub fn method(&mut self, defining_type: impl Into<TypeId>, signature: MethodSignature) -> NodeId {
        let node = MethodNode::new(defining_type, signature);
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(node.clone());
        self.index.insert(node, id);
        id
    }

    pub fn edge(&mut self, source: NodeId, target: NodeId, receiver: impl Into<TypeId>) -> &mut Self {
        self.edges.push(CallEdge {
            source,
            target,
            receiver: receiver.into(),
        });
        self
    }

    pub fn build(self, h: &TypeHierarchy) -> Result<CallGraph> {
        CallGraph::from_parts(h, self.nodes, self.edges)
    }
}

/// Predecessor lists for every node, one entry per edge (so parallel edges
/// with distinct receivers appear more than once).
#[derive(Debug, Clone)]
pub struct ReverseAdjacency {
    offsets: Vec<u32>,
    preds: Vec<NodeId>,
}

impl ReverseAdjacency {
    pub fn new(cg: &CallGraph) -> Self {
        let n = cg.node_count();
        let mut offsets = vec![0u32; n + 1];
        for e in cg.edges() {
            offsets[e.target.index() + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets.clone();
        let mut preds = vec![NodeId(0); cg.edge_count()];
        for e in cg.edges() {
            let slot = &mut cursor[e.target.index()];
            preds[*slot as usize] = e.source;
            *slot += 1;
        }
        ReverseAdjacency { offsets, preds }
    }

    pub fn predecessors(&self, id: NodeId) -> &[NodeId] {
        match (self.offsets.get(id.index()), self.offsets.get(id.index() + 1)) {
            (Some(&lo), Some(&hi)) => &self.preds[lo as usize..hi as usize],
            _ => &[],
        }
    }

    pub fn edge_count(&self) -> usize {
        self.preds.len()
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }
}
