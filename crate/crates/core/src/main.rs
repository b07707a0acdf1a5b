use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use cgprune::graph::{CallGraph, TypeHierarchy};
use cgprune::localness::{label_all, localness_distribution, HierarchyRule, LocalnessConfig, ProjectBoundary};
use cgprune::origins::{build_exclusion_list, find_origins, origin_edge_frequencies, unique_derivative_counts};
use cgprune::pipeline::{run_pipeline, OracleKind, PipelineConfig};
use cgprune::prune::{prune_exhaustive, prune_selective};
use cgprune::synth::{self, GenParams};
use cgprune::vuln::{inject_artificial_cves, propagate_timed, witnesses, ProjectRoleMap, TimingConfig};
use cgprune::{io, Error, Result};

const EXIT_VALIDATION: u8 = 3;
const EXIT_RUNTIME: u8 = 4;

#[derive(Parser)]
#[command(name = "cgprune", version, about = "Origin-method call graph pruning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic hierarchy and CHA call graph.
    Gen(GenArgs),
    /// Origin methods ranked by the number of edges into their derivatives.
    Origins(TableArgs),
    /// Number of distinct derivative methods per origin.
    Derivatives(TableArgs),
    /// Localness level distribution among derivatives of the top origins.
    Localness(LocalnessArgs),
    /// Remove edges into derivatives of excluded origins.
    Prune(PruneArgs),
    /// Inject artificial vulnerabilities and count reachable pairs.
    VulnSim(VulnArgs),
    /// Run a configured corpus sweep and write reports.
    Pipeline(PipelineArgs),
}

#[derive(Args)]
struct GraphArgs {
    /// Hierarchy file, or a bundle holding both hierarchy and call graph.
    #[arg(long, short = 'H')]
    hierarchy: PathBuf,
    /// Call graph file; defaults to the hierarchy file.
    #[arg(long, short = 'g')]
    call_graph: Option<PathBuf>,
    /// Treat types whose qualified name has this prefix as core.
    #[arg(long = "core-prefix")]
    core_prefixes: Vec<String>,
}

impl GraphArgs {
    fn load(&self) -> Result<(TypeHierarchy, CallGraph)> {
        let mut h = io::load_hierarchy(&self.hierarchy)?;
        if !self.core_prefixes.is_empty() {
            h = io::reclassify_core(&h, &self.core_prefixes)?;
        }
        let cg = io::load_call_graph(self.call_graph.as_ref().unwrap_or(&self.hierarchy), &h)?;
        Ok((h, cg))
    }
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write here instead of standard output.
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct GenArgs {
    /// TOML file with generator parameters; flags override it.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    types: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output bundle, or hierarchy file when --call-graph-out is given.
    #[arg(long, short = 'o')]
    out: PathBuf,
    #[arg(long)]
    call_graph_out: Option<PathBuf>,
}

#[derive(Args)]
struct TableArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Keep only the first N rows.
    #[arg(long)]
    top: Option<usize>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct LocalnessArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, default_value_t = 10)]
    top: usize,
    /// Same hierarchy only along ancestor chains.
    #[arg(long)]
    strict_hierarchy: bool,
    /// Same project also requires the same package.
    #[arg(long)]
    package_boundary: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exhaustive,
    Selective,
}

#[derive(Clone, Copy, ValueEnum)]
enum Oracle {
    KeepAll,
    PruneAll,
    Seeded,
}

#[derive(Args)]
struct PruneArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Exclude the N most frequent origins.
    #[arg(long, conflicts_with = "exclusions", required_unless_present = "exclusions")]
    top: Option<usize>,
    /// Exclusion list file.
    #[arg(long)]
    exclusions: Option<PathBuf>,
    #[arg(long)]
    save_exclusions: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Mode::Exhaustive)]
    mode: Mode,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    #[arg(long, value_enum, default_value_t = Oracle::KeepAll)]
    oracle: Oracle,
    #[arg(long, default_value_t = 0)]
    oracle_seed: u64,
    #[arg(long, default_value_t = 0.5)]
    prune_rate: f64,
    /// Write the hierarchy and pruned call graph here as one bundle.
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VulnArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Application project id.
    #[arg(long)]
    app: String,
    #[arg(long, default_value_t = 100)]
    cves: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use this assignment file instead of injecting.
    #[arg(long)]
    assignment: Option<PathBuf>,
    #[arg(long)]
    save_assignment: Option<PathBuf>,
    /// Also allow core methods to be vulnerable.
    #[arg(long)]
    include_core: bool,
    /// Include one witness path per reachable pair.
    #[arg(long)]
    witnesses: bool,
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long, short = 'c')]
    config: PathBuf,
    /// Directory for report.json, records.csv and aggregates.csv.
    #[arg(long, short = 'o')]
    out: PathBuf,
    /// Leave timing columns out of the reports.
    #[arg(long)]
    no_timing: bool,
}

fn emit(out: Option<&Path>, text: &[u8]) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io {
            path: p.to_path_buf(),
            source: e,
        }),
        None => std::io::stdout().write_all(text).map_err(|e| Error::Io {
            path: "<stdout>".into(),
            source: e,
        }),
    }
}

fn render<T: serde::Serialize>(
    output: &Output,
    value: &T,
    csv: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
) -> Result<()> {
    let mut buf = Vec::new();
    match output.format {
        Format::Json => {
            buf = serde_json::to_vec_pretty(value).expect("serializable");
            buf.push(b'\n');
        }
        Format::Csv => csv(&mut buf).expect("in-memory write"),
    }
    emit(output.out.as_deref(), &buf)
}

fn json_line(value: serde_json::Value) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(&value).expect("serializable");
    v.push(b'\n');
    v
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(a) => {
            let mut p: GenParams = match &a.params {
                Some(path) => {
                    let text = fs::read_to_string(path).map_err(|e| Error::Io {
                        path: path.clone(),
                        source: e,
                    })?;
                    toml::from_str(&text).map_err(|e| Error::InvalidParams(e.to_string()))?
                }
                None => GenParams::default(),
            };
            if let Some(t) = a.types {
                p.type_count = t;
            }
            if let Some(s) = a.seed {
                p.seed = s;
            }
            let (h, cg) = synth::generate(&p)?;
            match &a.call_graph_out {
                Some(g) => {
                    io::save_hierarchy(&a.out, &h)?;
                    io::save_call_graph(g, &cg)?;
                }
                None => io::save_bundle(&a.out, &h, &cg)?,
            }
            log::info!(
                "{} types, {} methods, {} edges",
                h.len(),
                cg.node_count(),
                cg.edge_count()
            );
        }
        Command::Origins(a) => {
            let (h, cg) = a.graph.load()?;
            let table = origin_edge_frequencies(&cg, &find_origins(&cg, &h)?)?;
            let rows = table.top(a.top.unwrap_or(usize::MAX));
            render(&a.output, &rows, |o| io::write_frequency_csv(o, &table, a.top))?;
        }
        Command::Derivatives(a) => {
            let (h, cg) = a.graph.load()?;
            let mut counts = unique_derivative_counts(&find_origins(&cg, &h)?);
            if let Some(n) = a.top {
                counts.truncate(n);
            }
            render(&a.output, &counts, |o| io::write_derivatives_csv(o, &counts))?;
        }
        Command::Localness(a) => {
            let (h, cg) = a.graph.load()?;
            let cfg = LocalnessConfig {
                hierarchy: if a.strict_hierarchy {
                    HierarchyRule::Strict
                } else {
                    HierarchyRule::Extended
                },
                boundary: if a.package_boundary {
                    ProjectBoundary::Package
                } else {
                    ProjectBoundary::Project
                },
            };
            let origins = find_origins(&cg, &h)?;
            let table = origin_edge_frequencies(&cg, &origins)?;
            let top: Vec<_> = table.top(a.top).iter().map(|r| r.origin.clone()).collect();
            let labels = label_all(&cg, &h, cfg)?;
            let dist = localness_distribution(&origins, &labels, &top)?;
            render(&a.output, &dist, |o| io::write_localness_csv(o, &dist))?;
        }
        Command::Prune(a) => {
            let (h, cg) = a.graph.load()?;
            let list = match (&a.exclusions, a.top) {
                (Some(path), _) => io::load_exclusion_list(path, &h)?,
                (None, Some(n)) => build_exclusion_list(&origin_edge_frequencies(&cg, &find_origins(&cg, &h)?)?, n),
                (None, None) => unreachable!("clap requires one of --top and --exclusions"),
            };
            if let Some(path) = &a.save_exclusions {
                io::save_exclusion_list(path, &list, &h)?;
            }
            let result = match a.mode {
                Mode::Exhaustive => prune_exhaustive(&cg, &list, &h)?,
                Mode::Selective => {
                    let oracle = match a.oracle {
                        Oracle::KeepAll => OracleKind::KeepAll,
                        Oracle::PruneAll => OracleKind::PruneAll,
                        Oracle::Seeded => OracleKind::Seeded {
                            seed: a.oracle_seed,
                            prune_rate: a.prune_rate,
                        },
                    }
                    .build();
                    prune_selective(&cg, &list, &h, oracle.as_ref(), a.threshold)?
                }
            };
            if let Some(path) = &a.out {
                io::save_bundle(path, &h, &result.graph)?;
            }
            emit(
                None,
                &json_line(json!({
                    "nodes": result.graph.node_count(),
                    "edges_before": cg.edge_count(),
                    "edges_after": result.graph.edge_count(),
                    "candidate_edges": result.candidate_edges,
                    "pruned_edges": result.pruned_edges,
                    "oracle_failures": result.oracle_failures,
                    "reduction_ratio": result.reduction_ratio,
                    "elapsed_secs": result.elapsed.as_secs_f64(),
                })),
            )?;
        }
        Command::VulnSim(a) => {
            let (h, cg) = a.graph.load()?;
            let roles = ProjectRoleMap {
                application_project: a.app,
                exclude_core: !a.include_core,
            };
            roles.check_application(&h)?;
            let assignment = match &a.assignment {
                Some(path) => io::load_assignment(path, &cg)?,
                None => inject_artificial_cves(&cg, &h, &roles, a.cves, a.seed)?,
            };
            if let Some(path) = &a.save_assignment {
                io::save_assignment(path, &assignment)?;
            }
            let result = propagate_timed(&cg, &h, &assignment, &roles, TimingConfig::default())?;
            let mut record = serde_json::to_value(&result).expect("serializable");
            if a.witnesses {
                record["witnesses"] =
                    serde_json::to_value(witnesses(&cg, &h, &assignment, &roles)?).expect("serializable");
            }
            emit(a.out.as_deref(), &json_line(record))?;
        }
        Command::Pipeline(a) => {
            let config = PipelineConfig::load(&a.config)?;
            let report = run_pipeline(&config)?;
            for f in &report.failures {
                log::warn!("{}: {}", f.graph, f.reason);
            }
            let report = if a.no_timing { report.without_timing() } else { report };
            report.write_to_dir(&a.out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() {
                EXIT_VALIDATION
            } else {
                EXIT_RUNTIME
            })
        }
    }
}
