use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use super::{MethodSignature, TypeId, TypeNode};
use crate::error::{Error, Result};

/// A broken hierarchy invariant, attributed to one type.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Violation {
    pub type_id: TypeId,
    pub rule: ViolationRule,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum ViolationRule {
    DuplicateId,
    DanglingParent(TypeId),
    /// The type sits on a parent cycle. One violation is reported per cycle,
    /// naming its smallest member.
    Cycle,
    CoreProjectMismatch {
        found: String,
    },
    DuplicateSignature(MethodSignature),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.rule {
            ViolationRule::DuplicateId => write!(f, "type `{}` is defined more than once", self.type_id),
            ViolationRule::DanglingParent(p) => {
                write!(f, "type `{}` lists unknown parent `{p}`", self.type_id)
            }
            ViolationRule::Cycle => write!(f, "type `{}` is part of a parent cycle", self.type_id),
            ViolationRule::CoreProjectMismatch { found } => write!(
                f,
                "core type `{}` belongs to project `{found}` instead of the core project",
                self.type_id
            ),
            ViolationRule::DuplicateSignature(sig) => {
                write!(f, "type `{}` declares `{sig}` twice", self.type_id)
            }
        }
    }
}

/// Checks a set of type records against the hierarchy invariants. An empty
/// result means `TypeHierarchy::new` will accept the same input.
pub fn validate_hierarchy(core_project: &str, types: &[TypeNode]) -> Vec<Violation> {
    let mut violations = Vec::new();
    let mut index: HashMap<&TypeId, usize> = HashMap::with_capacity(types.len());

    for (i, ty) in types.iter().enumerate() {
        if index.insert(&ty.id, i).is_some() {
            violations.push(Violation {
                type_id: ty.id.clone(),
                rule: ViolationRule::DuplicateId,
            });
        }
        if ty.is_core && ty.project != core_project {
            violations.push(Violation {
                type_id: ty.id.clone(),
                rule: ViolationRule::CoreProjectMismatch {
                    found: ty.project.clone(),
                },
            });
        }
        let mut seen = HashSet::new();
        for sig in &ty.declared {
            if !seen.insert(sig) {
                violations.push(Violation {
                    type_id: ty.id.clone(),
                    rule: ViolationRule::DuplicateSignature(sig.clone()),
                });
            }
        }
    }

    let mut graph = DiGraph::<usize, ()>::with_capacity(types.len(), types.len());
    let vertices: Vec<_> = (0..types.len()).map(|i| graph.add_node(i)).collect();
    for (i, ty) in types.iter().enumerate() {
        for parent in &ty.parents {
            match index.get(parent) {
                Some(&p) => {
                    graph.add_edge(vertices[i], vertices[p], ());
                }
                None => violations.push(Violation {
                    type_id: ty.id.clone(),
                    rule: ViolationRule::DanglingParent(parent.clone()),
                }),
            }
        }
    }

    for component in tarjan_scc(&graph) {
        let cyclic = component.len() > 1 || graph.contains_edge(component[0], component[0]);
        if cyclic {
            let smallest = component
                .iter()
                .map(|v| &types[graph[*v]].id)
                .min()
                .expect("non-empty component");
            violations.push(Violation {
                type_id: smallest.clone(),
                rule: ViolationRule::Cycle,
            });
        }
    }

    violations.sort();
    violations
}

/// A validated, acyclic subtype graph.
///
/// Types are stored densely, sorted by id. The strict ancestors of every type
/// are precomputed in breadth-first order keyed by `(depth, typeId)`, where
/// depth is the length of the shortest parent chain.
#[derive(Debug, Clone)]
pub struct TypeHierarchy {
    core_project: String,
    types: Vec<TypeNode>,
    index: HashMap<TypeId, u32>,
    /// Strict ancestors in (depth, id) order.
    ancestors: Vec<Vec<u32>>,
    /// Same sets, sorted by dense index for membership tests.
    ancestor_sets: Vec<Vec<u32>>,
    children: Vec<Vec<u32>>,
}

impl PartialEq for TypeHierarchy {
    fn eq(&self, other: &Self) -> bool {
        self.core_project == other.core_project && self.types == other.types
    }
}

impl Eq for TypeHierarchy {}

impl TypeHierarchy {
    pub fn new(core_project: impl Into<String>, mut types: Vec<TypeNode>) -> Result<Self> {
        let core_project = core_project.into();
        let violations = validate_hierarchy(&core_project, &types);
        if !violations.is_empty() {
            return Err(Error::InvalidHierarchy(violations));
        }

        types.sort_by(|a, b| a.id.cmp(&b.id));
        let index: HashMap<TypeId, u32> = types
            .iter()
            .enumerate()
            .map(|(i, t)| (t.id.clone(), i as u32))
            .collect();
        let parents: Vec<Vec<u32>> = types
            .iter()
            .map(|t| {
                let mut ps: Vec<u32> = t.parents.iter().map(|p| index[p]).collect();
                ps.sort_unstable();
                ps.dedup();
                ps
            })
            .collect();

        let mut children = vec![Vec::new(); types.len()];
        for (child, ps) in parents.iter().enumerate() {
            for &p in ps {
                children[p as usize].push(child as u32);
            }
        }

        let mut ancestors = Vec::with_capacity(types.len());
        let mut visited = vec![false; types.len()];
        for start in 0..types.len() {
            // Level-by-level BFS; ids are dense and sorted, so sorting each
            // level by index yields the (depth, typeId) order.
            let mut order = Vec::new();
            let mut level: Vec<u32> = parents[start].clone();
            for &p in &level {
                visited[p as usize] = true;
            }
            while !level.is_empty() {
                level.sort_unstable();
                order.extend_from_slice(&level);
                let mut next = Vec::new();
                for &t in &level {
                    for &p in &parents[t as usize] {
                        if !visited[p as usize] {
                            visited[p as usize] = true;
                            next.push(p);
                        }
                    }
                }
                level = next;
            }
            for &a in &order {
                visited[a as usize] = false;
            }
            ancestors.push(order);
        }
        let ancestor_sets = ancestors
            .iter()
            .map(|a| {
                let mut s = a.clone();
                s.sort_unstable();
                s
            })
            .collect();

        Ok(TypeHierarchy {
            core_project,
            types,
            index,
            ancestors,
            ancestor_sets,
            children,
        })
    }

    pub fn core_project(&self) -> &str {
        &self.core_project
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    /// All types, ordered by id.
    pub fn types(&self) -> &[TypeNode] {
        &self.types
    }

    pub fn get(&self, id: &TypeId) -> Option<&TypeNode> {
        self.index.get(id).map(|&i| &self.types[i as usize])
    }

    pub fn lookup(&self, id: &TypeId) -> Result<&TypeNode> {
        self.get(id).ok_or_else(|| Error::UnknownType(id.clone()))
    }

    pub fn find_by_fq_name(&self, fq_name: &str) -> Option<&TypeNode> {
        self.types.iter().find(|t| t.fq_name == fq_name)
    }

    /// Strict transitive ancestors of `id`, deduplicated, in breadth-first
    /// `(depth, typeId)` order.
    pub fn ancestors_of(&self, id: &TypeId) -> Result<Vec<TypeId>> {
        let i = self.dense(id)?;
        Ok(self.ancestors[i as usize]
            .iter()
            .map(|&a| self.types[a as usize].id.clone())
            .collect())
    }

    /// True iff `ty == ancestor` or `ancestor` is a strict ancestor of `ty`.
    pub fn is_reflexive_descendant(&self, ancestor: &TypeId, ty: &TypeId) -> Result<bool> {
        let a = self.dense(ancestor)?;
        let t = self.dense(ty)?;
        Ok(self.is_reflexive_descendant_dense(a, t))
    }

    /// `root` plus every type that transitively extends it, sorted by id.
    pub fn reflexive_descendants_of(&self, root: &TypeId) -> Result<Vec<TypeId>> {
        let r = self.dense(root)?;
        Ok(self
            .reflexive_descendants_dense(r)
            .into_iter()
            .map(|d| self.types[d as usize].id.clone())
            .collect())
    }

    pub(crate) fn dense(&self, id: &TypeId) -> Result<u32> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownType(id.clone()))
    }

    pub(crate) fn type_at(&self, i: u32) -> &TypeNode {
        &self.types[i as usize]
    }

    pub(crate) fn ancestors_dense(&self, i: u32) -> &[u32] {
        &self.ancestors[i as usize]
    }

    pub(crate) fn is_reflexive_descendant_dense(&self, ancestor: u32, ty: u32) -> bool {
        ancestor == ty || self.ancestor_sets[ty as usize].binary_search(&ancestor).is_ok()
    }

    pub(crate) fn reflexive_descendants_dense(&self, root: u32) -> BTreeSet<u32> {
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([root]);
        seen.insert(root);
        while let Some(t) = queue.pop_front() {
            for &c in &self.children[t as usize] {
                if seen.insert(c) {
                    queue.push_back(c);
                }
            }
        }
        seen
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture;

    fn tid(s: &str) -> TypeId {
        TypeId::new(s)
    }

    #[test]
    fn canonical_fixture_is_valid() {
        let types = fixture::canonical_types();
        assert_eq!(validate_hierarchy(fixture::CORE_PROJECT, &types), vec![]);
    }

    #[test]
    fn self_parent_is_one_cycle() {
        let mut types = fixture::canonical_types();
        types.iter_mut().find(|t| t.id == tid("T2")).unwrap().parents = vec![tid("T2")];
        let v = validate_hierarchy(fixture::CORE_PROJECT, &types);
        assert_eq!(
            v,
            vec![Violation {
                type_id: tid("T2"),
                rule: ViolationRule::Cycle
            }]
        );
    }

    #[test]
    fn two_cycle_reported_once() {
        let types = vec![
            TypeNode::new("A", "A").with_parents(["B"]),
            TypeNode::new("B", "B").with_parents(["A"]),
            TypeNode::new("C", "C").with_parents(["A"]),
        ];
        let v = validate_hierarchy("jre", &types);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].type_id, tid("A"));
        assert!(TypeHierarchy::new("jre", types).is_err());
    }

    #[test]
    fn dangling_parent_reported() {
        let mut types = fixture::canonical_types();
        types.iter_mut().find(|t| t.id == tid("T2")).unwrap().parents = vec![tid("T9")];
        let v = validate_hierarchy(fixture::CORE_PROJECT, &types);
        assert_eq!(
            v,
            vec![Violation {
                type_id: tid("T2"),
                rule: ViolationRule::DanglingParent(tid("T9"))
            }]
        );
    }

    #[test]
    fn core_types_must_live_in_core_project() {
        let types = vec![TypeNode::new("A", "A").in_project("app", "a").core()];
        let v = validate_hierarchy("jre", &types);
        assert!(matches!(v[0].rule, ViolationRule::CoreProjectMismatch { .. }));
    }

    #[test]
    fn duplicate_ids_and_signatures() {
        let sig: MethodSignature = "f():int".parse().unwrap();
        let types = vec![
            TypeNode::new("A", "A").declaring([sig.clone(), sig.clone()]),
            TypeNode::new("A", "A2"),
        ];
        let rules: Vec<_> = validate_hierarchy("jre", &types).into_iter().map(|v| v.rule).collect();
        assert!(rules.contains(&ViolationRule::DuplicateId));
        assert!(rules.contains(&ViolationRule::DuplicateSignature(sig)));
    }

    #[test]
    fn ancestors_on_fixture() {
        let h = fixture::canonical_hierarchy();
        assert_eq!(h.ancestors_of(&tid("T2")).unwrap(), vec![tid("T1"), tid("T0")]);
        assert_eq!(h.ancestors_of(&tid("T0")).unwrap(), vec![]);
        assert_eq!(h.ancestors_of(&tid("T4")).unwrap(), vec![tid("T0")]);
        assert!(matches!(h.ancestors_of(&tid("nope")), Err(Error::UnknownType(_))));
    }

    #[test]
    fn ancestors_ordered_by_depth_then_id() {
        // D -> {C, B}; C -> A; B -> A; A -> Z.  Depth 1: B, C; depth 2: A; depth 3: Z.
        let types = vec![
            TypeNode::new("Z", "Z"),
            TypeNode::new("A", "A").with_parents(["Z"]),
            TypeNode::new("B", "B").with_parents(["A"]),
            TypeNode::new("C", "C").with_parents(["A"]),
            TypeNode::new("D", "D").with_parents(["C", "B", "A"]),
        ];
        let h = TypeHierarchy::new("jre", types).unwrap();
        // A is a direct parent of D, so it sits at depth 1 despite the longer chains.
        assert_eq!(
            h.ancestors_of(&tid("D")).unwrap(),
            vec![tid("A"), tid("B"), tid("C"), tid("Z")]
        );
    }

    #[test]
    fn reflexive_descent_on_fixture() {
        let h = fixture::canonical_hierarchy();
        assert!(h.is_reflexive_descendant(&tid("T1"), &tid("T2")).unwrap());
        assert!(h.is_reflexive_descendant(&tid("T1"), &tid("T1")).unwrap());
        assert!(!h.is_reflexive_descendant(&tid("T2"), &tid("T1")).unwrap());
        assert!(h.is_reflexive_descendant(&tid("T0"), &tid("T3")).unwrap());
        assert!(h.is_reflexive_descendant(&tid("T9"), &tid("T1")).is_err());
        assert_eq!(
            h.reflexive_descendants_of(&tid("T1")).unwrap(),
            vec![tid("T1"), tid("T2"), tid("T3")]
        );
    }
}
