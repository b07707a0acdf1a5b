//! Writes a graph, an exclusion list and a vulnerability assignment to disk
//! and reads them back.
//!
//! `cargo run --example interchange_roundtrip`

use cgprune::io;
use cgprune::origins::{build_exclusion_list, find_origins, origin_edge_frequencies};
use cgprune::synth::{self, generate, GenParams};
use cgprune::vuln::{inject_artificial_cves, ProjectRoleMap};

pub fn run() -> cgprune::Result<()> {
    let dir = std::env::temp_dir().join(format!("cgprune-roundtrip-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| cgprune::Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    let (h, cg) = generate(&GenParams {
        type_count: 30,
        seed: 2,
        ..GenParams::default()
    })?;

    io::save_hierarchy(dir.join("types.jsonl"), &h)?;
    io::save_call_graph(dir.join("calls.jsonl"), &cg)?;
    let h2 = io::load_hierarchy(dir.join("types.jsonl"))?;
    let cg2 = io::load_call_graph(dir.join("calls.jsonl"), &h2)?;
    println!("graph round trip: {}", h2 == h && cg2 == cg);

    let list = build_exclusion_list(&origin_edge_frequencies(&cg, &find_origins(&cg, &h)?)?, 2);
    io::save_exclusion_list(dir.join("exclusions.txt"), &list, &h)?;
    print!("{}", io::format_exclusion_list(&list, &h)?);
    println!(
        "list round trip: {}",
        io::load_exclusion_list(dir.join("exclusions.txt"), &h)? == list
    );

    let a = inject_artificial_cves(&cg, &h, &ProjectRoleMap::new(synth::APPLICATION_PROJECT), 3, 7)?;
    io::save_assignment(dir.join("cves.txt"), &a)?;
    println!(
        "assignment round trip: {}",
        io::load_assignment(dir.join("cves.txt"), &cg)? == a
    );

    let _ = std::fs::remove_dir_all(&dir);
    Ok(())
}

#[allow(dead_code)]
fn main() -> cgprune::Result<()> {
    run()
}
