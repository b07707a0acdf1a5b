//! Runs a Top-N sweep over a small synthetic corpus and prints the
//! aggregate table.
//!
//! `cargo run --example pipeline_sweep`

use std::path::Path;

use cgprune::pipeline::{run_pipeline, PipelineConfig};

const CONFIG: &str = r#"
corpus = "example"
sweep = [0, 1, 2, 5]
cves = 10
cve_seed = 3
timing = { warmup = 0, repetitions = 1 }

[synthetic]
count = 5
params = { type_count = 60, seed = 20 }
"#;

pub fn run() -> cgprune::Result<()> {
    let config = PipelineConfig::from_toml(CONFIG, Path::new("."))?;
    let report = run_pipeline(&config)?;
    let mut out = Vec::new();
    report
        .without_timing()
        .write_aggregates_csv(&mut out)
        .expect("in-memory write");
    print!("{}", String::from_utf8_lossy(&out));
    for g in &report.graphs {
        println!("{}: {} edges, top origin {}", g.graph, g.edges, g.top_origins[0].origin);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> cgprune::Result<()> {
    run()
}
