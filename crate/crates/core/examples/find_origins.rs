//! Builds a small hierarchy by hand and resolves the origin of every called
//! method.
//!
//! `cargo run --example find_origins`

use cgprune::graph::{CallGraphBuilder, MethodSignature, TypeHierarchy, TypeNode};
use cgprune::origins::{find_origins, origin_edge_frequencies, unique_derivative_counts};

pub fn run() -> cgprune::Result<()> {
    let to_string = MethodSignature::new("toString", Vec::<String>::new(), "java.lang.String")?;
    let h = TypeHierarchy::new(
        "jre",
        vec![
            TypeNode::new("Object", "java.lang.Object")
                .in_project("jre", "java.lang")
                .core()
                .declaring([to_string.clone()]),
            TypeNode::new("Point", "com.example.Point")
                .in_project("app", "com.example")
                .with_parents(["Object"])
                .declaring([to_string.clone()]),
            TypeNode::new("Main", "com.example.Main")
                .in_project("app", "com.example")
                .with_parents(["Object"])
                .declaring(["main(java.lang.String[]):void".parse()?]),
        ],
    )?;

    let mut b = CallGraphBuilder::new();
    let main = b.method("Main", "main(java.lang.String[]):void".parse()?);
    let object = b.method("Object", to_string.clone());
    let point = b.method("Point", to_string);
    // `o.toString()` on a receiver of static type Object may dispatch to
    // either implementation.
    b.edge(main, object, "Object").edge(main, point, "Object");
    let cg = b.build(&h)?;

    let origins = find_origins(&cg, &h)?;
    for (node, origin) in origins.iter() {
        println!("{} -> {origin}", cg.node(node)?);
    }
    for row in &origin_edge_frequencies(&cg, &origins)?.rows {
        println!("{}: {} edges", row.origin, row.edge_count);
    }
    for d in unique_derivative_counts(&origins) {
        println!("{}: {} derivatives", d.origin, d.derivatives);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> cgprune::Result<()> {
    run()
}
