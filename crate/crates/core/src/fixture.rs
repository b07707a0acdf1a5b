//! A small hand-checkable hierarchy and call graph.
//!
//! Six types across three projects (`jre`, `app`, `lib`):
//!
//! ```text
//! T0 java.lang.Object      (core)  hashCode() toString()
//! ├── T1 java.util.Iterator (core)  next() hasNext()
//! │   ├── T2 com.app.a.MyIter        next() helper()
//! │   └── T3 org.lib.b.LibIter       next()
//! ├── T4 com.app.b.Service           run() use()
//! └── T5 com.app.c.Helper            fmt()
//! ```
//!
//! Edges, in order: `T4.run -> T2.next [T1]`, `T4.run -> T3.next [T1]`,
//! `T2.next -> T2.helper [T2]`, `T2.helper -> T0.hashCode [T0]`,
//! `T4.use -> T4.run [T4]`, `T3.next -> T4.run [T4]`, `T4.use -> T5.fmt [T5]`.

use crate::graph::{CallGraph, CallGraphBuilder, MethodSignature, NodeId, TypeHierarchy, TypeId, TypeNode};

pub const CORE_PROJECT: &str = "jre";
pub const APPLICATION_PROJECT: &str = "app";

/// Signature used by the fixture for a method name.
pub fn sig(name: &str) -> MethodSignature {
    let ret = match name {
        "hashCode" => "int",
        "toString" | "fmt" => "java.lang.String",
        "next" => "java.lang.Object",
        "hasNext" => "boolean",
        _ => "void",
    };
    MethodSignature::new(name, Vec::<String>::new(), ret).expect("fixture signature")
}

fn sigs(names: &[&str]) -> Vec<MethodSignature> {
    names.iter().map(|n| sig(n)).collect()
}

pub fn canonical_types() -> Vec<TypeNode> {
    vec![
        TypeNode::new("T0", "java.lang.Object")
            .in_project(CORE_PROJECT, "java.lang")
            .core()
            .declaring(sigs(&["hashCode", "toString"])),
        TypeNode::new("T1", "java.util.Iterator")
            .in_project(CORE_PROJECT, "java.util")
            .core()
            .with_parents(["T0"])
            .declaring(sigs(&["next", "hasNext"])),
        TypeNode::new("T2", "com.app.a.MyIter")
            .in_project("app", "com.app.a")
            .with_parents(["T1"])
            .declaring(sigs(&["next", "helper"])),
        TypeNode::new("T3", "org.lib.b.LibIter")
            .in_project("lib", "org.lib.b")
            .with_parents(["T1"])
            .declaring(sigs(&["next"])),
        TypeNode::new("T4", "com.app.b.Service")
            .in_project("app", "com.app.b")
            .with_parents(["T0"])
            .declaring(sigs(&["run", "use"])),
        TypeNode::new("T5", "com.app.c.Helper")
            .in_project("app", "com.app.c")
            .with_parents(["T0"])
            .declaring(sigs(&["fmt"])),
    ]
}

pub fn canonical_hierarchy() -> TypeHierarchy {
    TypeHierarchy::new(CORE_PROJECT, canonical_types()).expect("fixture hierarchy is valid")
}

/// The fixture hierarchy together with its seven-edge call graph.
pub fn canonical() -> (TypeHierarchy, CallGraph) {
    let h = canonical_hierarchy();
    let mut b = CallGraphBuilder::new();
    for ty in h.types() {
        for s in &ty.declared {
            b.method(ty.id.clone(), s.clone());
        }
    }
    let mut node = |t: &str, n: &str| b.method(t, sig(n));
    let t4_run = node("T4", "run");
    let t4_use = node("T4", "use");
    let t2_next = node("T2", "next");
    let t3_next = node("T3", "next");
    let t2_helper = node("T2", "helper");
    let t0_hash = node("T0", "hashCode");
    let t5_fmt = node("T5", "fmt");
    b.edge(t4_run, t2_next, "T1")
        .edge(t4_run, t3_next, "T1")
        .edge(t2_next, t2_helper, "T2")
        .edge(t2_helper, t0_hash, "T0")
        .edge(t4_use, t4_run, "T4")
        .edge(t3_next, t4_run, "T4")
        .edge(t4_use, t5_fmt, "T5");
    let cg = b.build(&h).expect("fixture call graph is valid");
    (h, cg)
}

/// Node id of `ty.name` in a graph built from the fixture.
///
/// Panics if the method is not part of the graph.
pub fn m(cg: &CallGraph, ty: &str, name: &str) -> NodeId {
    cg.find(&TypeId::new(ty), &sig(name))
        .unwrap_or_else(|| panic!("fixture has no method {ty}.{name}"))
}
