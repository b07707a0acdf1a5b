//! Localness levels: how far a method's direct calls escape.
//!
//! | level | meaning |
//! |-------|---------|
//! | 0 | core-library method, or calls nothing but core-library code |
//! | 1 | calls non-core code, but only inside its own class hierarchy |
//! | 2 | calls outside its hierarchy, staying within its project |
//! | 3 | calls outside its hierarchy into another project |
//!
//! Outgoing edges are scanned in graph edge order. A same-hierarchy target
//! only yields level 1 while the label is still below 2; once a method has
//! escaped its hierarchy, later same-hierarchy targets are judged by the
//! project test like any other target. The scan stops at the first level-3
//! target. Only direct calls are considered.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CallGraph, NodeId, TypeHierarchy};
use crate::origins::{OriginMap, OriginRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum LocalnessLevel {
    Core = 0,
    Hierarchy = 1,
    Project = 2,
    Foreign = 3,
}

impl LocalnessLevel {
    pub const ALL: [LocalnessLevel; 4] = [
        LocalnessLevel::Core,
        LocalnessLevel::Hierarchy,
        LocalnessLevel::Project,
        LocalnessLevel::Foreign,
    ];

    pub fn value(self) -> u8 {
        self as u8
    }
}

impl From<LocalnessLevel> for u8 {
    fn from(l: LocalnessLevel) -> u8 {
        l.value()
    }
}

impl TryFrom<u8> for LocalnessLevel {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        LocalnessLevel::ALL
            .get(v as usize)
            .copied()
            .ok_or_else(|| format!("localness level must be 0..=3, got {v}"))
    }
}

impl fmt::Display for LocalnessLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// When two types count as being in the same class hierarchy.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HierarchyRule {
    /// Same type, reflexive ancestor or reflexive descendant, or the two
    /// types share a non-core ancestor (sibling overriders).
    #[default]
    Extended,
    /// Same type, reflexive ancestor or reflexive descendant only.
    Strict,
}

/// Granularity of the level-2/level-3 boundary.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjectBoundary {
    #[default]
    Project,
    Package,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalnessConfig {
    #[serde(default)]
    pub hierarchy: HierarchyRule,
    #[serde(default)]
    pub boundary: ProjectBoundary,
}

fn same_hierarchy(h: &TypeHierarchy, a: u32, b: u32, rule: HierarchyRule) -> bool {
    if h.is_reflexive_descendant_dense(a, b) || h.is_reflexive_descendant_dense(b, a) {
        return true;
    }
    match rule {
        HierarchyRule::Strict => false,
        HierarchyRule::Extended => h
            .ancestors_dense(a)
            .iter()
            .filter(|&&anc| !h.type_at(anc).is_core)
            .any(|&anc| h.is_reflexive_descendant_dense(anc, b)),
    }
}

fn same_project(h: &TypeHierarchy, a: u32, b: u32, boundary: ProjectBoundary) -> bool {
    let (ta, tb) = (h.type_at(a), h.type_at(b));
    match boundary {
        ProjectBoundary::Project => ta.project == tb.project,
        ProjectBoundary::Package => ta.project == tb.project && ta.package == tb.package,
    }
}

/// Localness level of a single method.
pub fn categorize(node: NodeId, cg: &CallGraph, h: &TypeHierarchy, cfg: LocalnessConfig) -> Result<LocalnessLevel> {
    let method = cg.node(node)?;
    let own = h.dense(&method.defining_type)?;
    if h.type_at(own).is_core {
        return Ok(LocalnessLevel::Core);
    }
    let mut label = LocalnessLevel::Core;
    for edge in cg.outgoing(node) {
        let target = cg.node(edge.target)?;
        let tty = h.dense(&target.defining_type)?;
        if h.type_at(tty).is_core {
            continue;
        }
        if label < LocalnessLevel::Project && same_hierarchy(h, own, tty, cfg.hierarchy) {
            label = LocalnessLevel::Hierarchy;
        } else if same_project(h, own, tty, cfg.boundary) {
            label = LocalnessLevel::Project;
        } else {
            label = LocalnessLevel::Foreign;
            break;
        }
    }
    Ok(label)
}

/// Levels for every node of a graph, indexed by node id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalnessLabels(Vec<LocalnessLevel>);

impl LocalnessLabels {
    pub fn get(&self, node: NodeId) -> Option<LocalnessLevel> {
        self.0.get(node.index()).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, LocalnessLevel)> + '_ {
        self.0.iter().enumerate().map(|(i, l)| (NodeId(i as u32), *l))
    }

    /// Number of nodes at each level.
    pub fn histogram(&self) -> [u64; 4] {
        let mut counts = [0; 4];
        for l in &self.0 {
            counts[l.value() as usize] += 1;
        }
        counts
    }
}

pub fn label_all(cg: &CallGraph, h: &TypeHierarchy, cfg: LocalnessConfig) -> Result<LocalnessLabels> {
    cg.node_ids()
        .map(|n| categorize(n, cg, h, cfg))
        .collect::<Result<Vec<_>>>()
        .map(LocalnessLabels)
}

/// Level distribution among the derivatives of one origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelShare {
    pub origin: OriginRef,
    pub counts: [u64; 4],
    /// Relative frequencies; `None` when the origin has no derivatives.
    pub frequencies: Option<[f64; 4]>,
}

impl LevelShare {
    pub fn derivatives(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_none()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LocalnessDistribution {
    pub rows: Vec<LevelShare>,
}

impl LocalnessDistribution {
    pub fn get(&self, origin: &OriginRef) -> Option<&LevelShare> {
        self.rows.iter().find(|r| &r.origin == origin)
    }
}

/// Relative frequency of each level among the derivatives of each origin in
/// `top`, in the order given.
pub fn localness_distribution(
    origins: &OriginMap,
    labels: &LocalnessLabels,
    top: &[OriginRef],
) -> Result<LocalnessDistribution> {
    let mut rows = Vec::with_capacity(top.len());
    for origin in top {
        let mut counts = [0u64; 4];
        for node in origins.derivatives_of(origin) {
            let level = labels.get(node).ok_or(Error::UnknownNode(node))?;
            counts[level.value() as usize] += 1;
        }
        let total: u64 = counts.iter().sum();
        let frequencies = (total > 0).then(|| counts.map(|c| c as f64 / total as f64));
        rows.push(LevelShare {
            origin: origin.clone(),
            counts,
            frequencies,
        });
    }
    Ok(LocalnessDistribution { rows })
}
