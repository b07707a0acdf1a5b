//! Batch runs over a corpus of call graphs.
//!
//! For every graph: load or generate, find origins, count frequencies, label
//! localness, then for each Top-N value of the sweep build the exclusion
//! list, prune, and rerun the vulnerability propagation against the same
//! assignment. Per-graph rows are aggregated by Top-N.
//!
//! A configuration is a TOML file:
//!
//! ```toml
//! corpus = "desk"
//! sweep = [0, 1, 5]
//! mode = "selective"
//! threshold = 0.5
//! oracle = { kind = "seeded", seed = 3, prune_rate = 0.5 }
//! cves = 20
//! cve_seed = 7
//!
//! [synthetic]
//! count = 4
//! params = { type_count = 80, seed = 100 }
//!
//! [[graphs]]
//! name = "fixture"
//! hierarchy = "fixture.jsonl"
//! application_project = "app"
//! ```

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CallGraph, TypeHierarchy};
use crate::io;
use crate::localness::{label_all, localness_distribution, LocalnessConfig, LocalnessDistribution};
use crate::origins::{build_exclusion_list, find_origins, origin_edge_frequencies, OriginFrequency, OriginRef};
use crate::prune::{
    prune_exhaustive, prune_selective, KeepAll, PruneAll, PruneDecisionOracle, PruneResult, SeededOracle,
};
use crate::synth::{self, GenParams};
use crate::vuln::{
    compare, inject_artificial_cves, propagate_timed, ProjectRoleMap, TimingConfig, VulnerabilityAssignment,
};

pub const DEFAULT_SWEEP: [usize; 9] = [1, 2, 3, 5, 10, 25, 50, 100, 1000];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PruneMode {
    #[default]
    Exhaustive,
    Selective,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OracleKind {
    #[default]
    KeepAll,
    PruneAll,
    Seeded {
        seed: u64,
        prune_rate: f64,
    },
}

impl OracleKind {
    pub fn build(self) -> Box<dyn PruneDecisionOracle + Sync> {
        match self {
            OracleKind::KeepAll => Box::new(KeepAll),
            OracleKind::PruneAll => Box::new(PruneAll),
            OracleKind::Seeded { seed, prune_rate } => Box::new(SeededOracle { seed, prune_rate }),
        }
    }
}

/// A graph stored on disk. Without `call_graph`, `hierarchy` is a bundle
/// holding both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphInput {
    pub name: String,
    pub hierarchy: PathBuf,
    #[serde(default)]
    pub call_graph: Option<PathBuf>,
    #[serde(default)]
    pub application_project: Option<String>,
    /// Fixed vulnerable methods instead of injected ones.
    #[serde(default)]
    pub assignment: Option<PathBuf>,
}

/// `count` generated graphs; graph `i` uses seed `params.seed + i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticCorpus {
    pub count: usize,
    #[serde(default)]
    pub params: GenParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub corpus: String,
    #[serde(default)]
    pub graphs: Vec<GraphInput>,
    #[serde(default)]
    pub synthetic: Option<SyntheticCorpus>,
    #[serde(default = "default_sweep")]
    pub sweep: Vec<usize>,
    #[serde(default)]
    pub mode: PruneMode,
    #[serde(default)]
    pub oracle: OracleKind,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_cves")]
    pub cves: usize,
    #[serde(default)]
    pub cve_seed: u64,
    /// Fallback for inputs that do not name one.
    #[serde(default)]
    pub application_project: Option<String>,
    #[serde(default = "default_true")]
    pub exclude_core: bool,
    /// Types whose qualified name starts with one of these become core.
    #[serde(default)]
    pub core_prefixes: Vec<String>,
    #[serde(default)]
    pub timing: TimingConfig,
    #[serde(default)]
    pub localness: LocalnessConfig,
    #[serde(default = "default_top_origins")]
    pub top_origins: usize,
    #[serde(default = "default_threads")]
    pub threads: usize,
}

fn default_sweep() -> Vec<usize> {
    DEFAULT_SWEEP.to_vec()
}

fn default_threshold() -> f64 {
    0.5
}

fn default_cves() -> usize {
    100
}

fn default_true() -> bool {
    true
}

fn default_top_origins() -> usize {
    10
}

fn default_threads() -> usize {
    1
}

impl PipelineConfig {
    pub fn new(corpus: impl Into<String>) -> Self {
        toml::from_str(&format!("corpus = {}", toml::Value::String(corpus.into()))).expect("minimal config parses")
    }

    /// Parses TOML, resolving relative input paths against `base_dir`.
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut config: PipelineConfig =
            toml::from_str(text).map_err(|e| Error::InvalidParams(format!("pipeline config: {e}")))?;
        for g in &mut config.graphs {
            for p in [Some(&mut g.hierarchy), g.call_graph.as_mut(), g.assignment.as_mut()]
                .into_iter()
                .flatten()
            {
                if p.is_relative() {
                    *p = base_dir.join(&*p);
                }
            }
        }
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::InvalidParams(format!(
                "threshold {} outside [0, 1]",
                self.threshold
            )));
        }
        if self.cves == 0 {
            return Err(Error::InvalidParams("cves must be positive".into()));
        }
        if self.sweep.is_empty() {
            return Err(Error::InvalidParams("sweep is empty".into()));
        }
        if self.threads == 0 {
            return Err(Error::InvalidParams("threads must be positive".into()));
        }
        if let Some(s) = &self.synthetic {
            s.params.validate()?;
        }
        Ok(())
    }

    /// Distinct sweep values in first-occurrence order.
    fn sweep_values(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for &n in &self.sweep {
            if !out.contains(&n) {
                out.push(n);
            }
        }
        out
    }
}

/// One graph pruned with one Top-N value. Timing fields are `None` in a
/// report stripped with [`AnalysisReport::without_timing`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub graph: String,
    pub top_n: usize,
    pub nodes: usize,
    pub edges: usize,
    pub candidate_edges: usize,
    pub pruned_edges: usize,
    pub oracle_failures: usize,
    pub reduction_ratio: f64,
    pub reachable_pairs: u64,
    pub reachable_fraction: f64,
    pub pair_delta: i64,
    pub fraction_delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis_secs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prune_secs: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    /// Mean and sample standard deviation; the deviation of fewer than two
    /// values is 0.
    pub fn of(values: &[f64]) -> Stat {
        let n = values.len();
        if n == 0 {
            return Stat { mean: 0.0, std: 0.0 };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        Stat { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub top_n: usize,
    pub graphs: usize,
    pub nodes: Stat,
    pub edges: Stat,
    pub reduction_ratio: Stat,
    pub reachable_pairs: Stat,
    pub reachable_fraction: Stat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis_secs: Option<Stat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prune_secs: Option<Stat>,
}

/// Per-graph results that do not depend on Top-N.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub graph: String,
    pub nodes: usize,
    pub edges: usize,
    pub collapsed_duplicates: usize,
    pub ambiguous_targets: usize,
    pub distinct_origins: usize,
    pub vulnerable: usize,
    pub baseline_pairs: u64,
    pub baseline_fraction: f64,
    pub level_histogram: [u64; 4],
    pub top_origins: Vec<OriginFrequency>,
    pub localness: LocalnessDistribution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub graph: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub corpus: String,
    pub graphs: Vec<GraphSummary>,
    pub records: Vec<SweepRecord>,
    pub aggregates: Vec<Aggregate>,
    pub failures: Vec<Failure>,
}

/// Mean and deviation per Top-N value, in `sweep` order.
pub fn aggregate(records: &[SweepRecord], sweep: &[usize]) -> Vec<Aggregate> {
    sweep
        .iter()
        .map(|&n| {
            let rows: Vec<&SweepRecord> = records.iter().filter(|r| r.top_n == n).collect();
            let stat = |f: &dyn Fn(&SweepRecord) -> f64| Stat::of(&rows.iter().map(|r| f(r)).collect::<Vec<_>>());
            let timed = |f: &dyn Fn(&SweepRecord) -> Option<f64>| {
                rows.iter()
                    .map(|r| f(r))
                    .collect::<Option<Vec<_>>>()
                    .map(|v| Stat::of(&v))
            };
            Aggregate {
                top_n: n,
                graphs: rows.len(),
                nodes: stat(&|r| r.nodes as f64),
                edges: stat(&|r| r.edges as f64),
                reduction_ratio: stat(&|r| r.reduction_ratio),
                reachable_pairs: stat(&|r| r.reachable_pairs as f64),
                reachable_fraction: stat(&|r| r.reachable_fraction),
                analysis_secs: timed(&|r| r.analysis_secs),
                prune_secs: timed(&|r| r.prune_secs),
            }
        })
        .collect()
}

impl AnalysisReport {
    /// Copy with every timing field removed, for byte comparisons.
    pub fn without_timing(&self) -> AnalysisReport {
        let mut r = self.clone();
        for rec in &mut r.records {
            rec.analysis_secs = None;
            rec.prune_secs = None;
        }
        for a in &mut r.aggregates {
            a.analysis_secs = None;
            a.prune_secs = None;
        }
        r
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Timing columns are written only when present.
    pub fn write_records_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let timed = self
            .records
            .iter()
            .all(|r| r.analysis_secs.is_some() && r.prune_secs.is_some());
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![
            "graph",
            "top_n",
            "nodes",
            "edges",
            "candidate_edges",
            "pruned_edges",
            "oracle_failures",
            "reduction_ratio",
            "reachable_pairs",
            "reachable_fraction",
            "pair_delta",
            "fraction_delta",
        ];
        if timed {
            header.extend(["analysis_secs", "prune_secs"]);
        }
        w.write_record(&header)?;
        for r in &self.records {
            let mut row = vec![
                r.graph.clone(),
                r.top_n.to_string(),
                r.nodes.to_string(),
                r.edges.to_string(),
                r.candidate_edges.to_string(),
                r.pruned_edges.to_string(),
                r.oracle_failures.to_string(),
                r.reduction_ratio.to_string(),
                r.reachable_pairs.to_string(),
                r.reachable_fraction.to_string(),
                r.pair_delta.to_string(),
                r.fraction_delta.to_string(),
            ];
            if timed {
                row.push(r.analysis_secs.unwrap_or_default().to_string());
                row.push(r.prune_secs.unwrap_or_default().to_string());
            }
            w.write_record(&row)?;
        }
        w.flush()
    }

    pub fn write_aggregates_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let timed = self
            .aggregates
            .iter()
            .all(|a| a.analysis_secs.is_some() && a.prune_secs.is_some());
        let mut columns = vec![
            "nodes",
            "edges",
            "reduction_ratio",
            "reachable_pairs",
            "reachable_fraction",
        ];
        if timed {
            columns.extend(["analysis_secs", "prune_secs"]);
        }
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["top_n".to_string(), "graphs".to_string()];
        for c in &columns {
            header.push(format!("{c}_mean"));
            header.push(format!("{c}_std"));
        }
        w.write_record(&header)?;
        for a in &self.aggregates {
            let mut stats = vec![
                a.nodes,
                a.edges,
                a.reduction_ratio,
                a.reachable_pairs,
                a.reachable_fraction,
            ];
            if timed {
                stats.extend([a.analysis_secs.unwrap(), a.prune_secs.unwrap()]);
            }
            let mut row = vec![a.top_n.to_string(), a.graphs.to_string()];
            for s in stats {
                row.push(s.mean.to_string());
                row.push(s.std.to_string());
            }
            w.write_record(&row)?;
        }
        w.flush()
    }

    /// Writes `report.json`, `records.csv` and `aggregates.csv` into `dir`.
    pub fn write_to_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let json = dir.join("report.json");
        fs::write(&json, self.to_json()).map_err(|e| Error::io(&json, e))?;
        for (name, f) in [
            (
                "records.csv",
                Self::write_records_csv as fn(&Self, fs::File) -> std::io::Result<()>,
            ),
            ("aggregates.csv", Self::write_aggregates_csv),
        ] {
            let path = dir.join(name);
            let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
            f(self, file).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

struct LoadedGraph {
    hierarchy: TypeHierarchy,
    graph: CallGraph,
    application_project: String,
    assignment: Option<VulnerabilityAssignment>,
}

enum Source<'a> {
    File(&'a GraphInput),
    Synthetic(GenParams),
}

impl Source<'_> {
    fn load(&self, config: &PipelineConfig) -> Result<LoadedGraph> {
        match self {
            Source::File(input) => {
                let mut hierarchy = io::load_hierarchy(&input.hierarchy)?;
                if !config.core_prefixes.is_empty() {
                    hierarchy = io::reclassify_core(&hierarchy, &config.core_prefixes)?;
                }
                let graph = io::load_call_graph(input.call_graph.as_ref().unwrap_or(&input.hierarchy), &hierarchy)?;
                let application_project = input
                    .application_project
                    .clone()
                    .or_else(|| config.application_project.clone())
                    .ok_or_else(|| Error::InvalidParams("no application project configured".into()))?;
                ProjectRoleMap::new(application_project.as_str()).check_application(&hierarchy)?;
                let assignment = input
                    .assignment
                    .as_ref()
                    .map(|p| io::load_assignment(p, &graph))
                    .transpose()?;
                Ok(LoadedGraph {
                    hierarchy,
                    graph,
                    application_project,
                    assignment,
                })
            }
            Source::Synthetic(params) => {
                let (hierarchy, graph) = synth::generate(params)?;
                Ok(LoadedGraph {
                    hierarchy,
                    graph,
                    application_project: config
                        .application_project
                        .clone()
                        .unwrap_or_else(|| synth::APPLICATION_PROJECT.to_string()),
                    assignment: None,
                })
            }
        }
    }
}

fn timed_prune(
    config: &PipelineConfig,
    oracle: &(dyn PruneDecisionOracle + Sync),
    run: impl Fn(&dyn PruneDecisionOracle) -> Result<PruneResult>,
) -> Result<PruneResult> {
    for _ in 0..config.timing.warmup {
        run(oracle)?;
    }
    let reps = config.timing.repetitions.max(1);
    let mut total = Duration::ZERO;
    let mut last = None;
    for _ in 0..reps {
        let r = run(oracle)?;
        total += r.elapsed;
        last = Some(r);
    }
    let mut r = last.expect("at least one repetition");
    r.elapsed = total / reps;
    Ok(r)
}

type GraphOutcome = Result<(GraphSummary, Vec<SweepRecord>)>;

fn analyze(
    name: &str,
    source: &Source<'_>,
    config: &PipelineConfig,
    sweep: &[usize],
    oracle: &(dyn PruneDecisionOracle + Sync),
) -> GraphOutcome {
    let LoadedGraph {
        hierarchy: h,
        graph: cg,
        application_project,
        assignment,
    } = source.load(config)?;
    let origins = find_origins(&cg, &h)?;
    let table = origin_edge_frequencies(&cg, &origins)?;
    let labels = label_all(&cg, &h, config.localness)?;
    let top: Vec<OriginRef> = table.top(config.top_origins).iter().map(|r| r.origin.clone()).collect();
    let localness = localness_distribution(&origins, &labels, &top)?;

    let roles = ProjectRoleMap {
        application_project,
        exclude_core: config.exclude_core,
    };
    let assignment = match assignment {
        Some(a) => a,
        None => inject_artificial_cves(&cg, &h, &roles, config.cves, config.cve_seed)?,
    };
    let base = propagate_timed(&cg, &h, &assignment, &roles, config.timing)?;

    let mut records = Vec::with_capacity(sweep.len());
    for &n in sweep {
        let list = build_exclusion_list(&table, n);
        let pruned = match config.mode {
            PruneMode::Exhaustive => timed_prune(config, oracle, |_| prune_exhaustive(&cg, &list, &h))?,
            PruneMode::Selective => {
                timed_prune(config, oracle, |o| prune_selective(&cg, &list, &h, o, config.threshold))?
            }
        };
        let after = propagate_timed(&pruned.graph, &h, &assignment, &roles, config.timing)?;
        let delta = compare(&base, &after)?;
        records.push(SweepRecord {
            graph: name.to_string(),
            top_n: n,
            nodes: pruned.graph.node_count(),
            edges: pruned.graph.edge_count(),
            candidate_edges: pruned.candidate_edges,
            pruned_edges: pruned.pruned_edges,
            oracle_failures: pruned.oracle_failures,
            reduction_ratio: pruned.reduction_ratio,
            reachable_pairs: after.reachable_pairs,
            reachable_fraction: after.reachable_vuln_fraction,
            pair_delta: delta.pair_delta,
            fraction_delta: delta.fraction_delta,
            analysis_secs: Some(after.elapsed.as_secs_f64()),
            prune_secs: Some(pruned.elapsed.as_secs_f64()),
        });
    }

    let summary = GraphSummary {
        graph: name.to_string(),
        nodes: cg.node_count(),
        edges: cg.edge_count(),
        collapsed_duplicates: cg.collapsed_duplicates(),
        ambiguous_targets: origins.ambiguities().len(),
        distinct_origins: table.len(),
        vulnerable: assignment.nodes.len(),
        baseline_pairs: base.reachable_pairs,
        baseline_fraction: base.reachable_vuln_fraction,
        level_histogram: labels.histogram(),
        top_origins: table.top(config.top_origins).to_vec(),
        localness,
    };
    Ok((summary, records))
}

/// Runs the whole corpus. A graph that fails at any stage is reported in
/// [`AnalysisReport::failures`] and skipped; only an invalid configuration
/// is an error.
pub fn run_pipeline(config: &PipelineConfig) -> Result<AnalysisReport> {
    config.validate()?;
    let sweep = config.sweep_values();
    let oracle = config.oracle.build();

    let mut sources: Vec<(String, Source<'_>)> = config
        .graphs
        .iter()
        .map(|g| (g.name.clone(), Source::File(g)))
        .collect();
    if let Some(s) = &config.synthetic {
        let width = s.count.saturating_sub(1).to_string().len();
        for i in 0..s.count {
            let mut params = s.params.clone();
            params.seed = params.seed.wrapping_add(i as u64);
            sources.push((format!("synthetic-{i:0width$}"), Source::Synthetic(params)));
        }
    }

    let results: Vec<Mutex<Option<GraphOutcome>>> = sources.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let worker = || loop {
        let i = next.fetch_add(1, Ordering::Relaxed);
        let Some((name, source)) = sources.get(i) else {
            break;
        };
        log::info!("analyzing {name}");
        let r = analyze(name, source, config, &sweep, oracle.as_ref());
        *results[i].lock().unwrap() = Some(r);
    };
    std::thread::scope(|s| {
        for _ in 1..config.threads.min(sources.len()) {
            s.spawn(worker);
        }
        worker();
    });

    let mut report = AnalysisReport {
        corpus: config.corpus.clone(),
        graphs: Vec::new(),
        records: Vec::new(),
        aggregates: Vec::new(),
        failures: Vec::new(),
    };
    for ((name, _), slot) in sources.iter().zip(results) {
        match slot.into_inner().unwrap().expect("every graph is analyzed") {
            Ok((summary, records)) => {
                report.graphs.push(summary);
                report.records.extend(records);
            }
            Err(e) => {
                log::warn!("{name}: {e}");
                report.failures.push(Failure {
                    graph: name.clone(),
                    reason: e.to_string(),
                });
            }
        }
    }
    report.aggregates = aggregate(&report.records, &sweep);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture;

    fn fixture_config(dir: &Path, sweep: Vec<usize>) -> PipelineConfig {
        let (h, cg) = fixture::canonical();
        io::save_bundle(dir.join("f1.jsonl"), &h, &cg).unwrap();
        let vulnerable = fixture::m(&cg, "T3", "next");
        let assignment = VulnerabilityAssignment {
            nodes: [vulnerable].into_iter().collect(),
            seed: 0,
            requested: 1,
        };
        io::save_assignment(dir.join("f1.cves"), &assignment).unwrap();
        let text = format!(
            "corpus = \"f1\"\nsweep = {sweep:?}\n[[graphs]]\nname = \"f1\"\nhierarchy = \"f1.jsonl\"\napplication_project = \"{}\"\nassignment = \"f1.cves\"\n",
            fixture::APPLICATION_PROJECT
        );
        PipelineConfig::from_toml(&text, dir).unwrap()
    }

    #[test]
    fn fixture_sweep() {
        let dir = tempfile::tempdir().unwrap();
        let report = run_pipeline(&fixture_config(dir.path(), vec![0, 1])).unwrap();
        assert!(report.failures.is_empty(), "{:?}", report.failures);
        let r = &report.records;
        assert_eq!(r.len(), 2);
        assert_eq!(
            (r[0].edges, r[0].reduction_ratio, r[0].reachable_fraction),
            (7, 0.0, 1.0)
        );
        assert_eq!(r[1].edges, 5);
        assert_eq!(r[1].reduction_ratio, 2.0 / 7.0);
        assert_eq!(r[1].reachable_fraction, 0.0);
        assert_eq!(r[1].pair_delta, -(report.graphs[0].baseline_pairs as i64));
    }

    #[test]
    fn sweep_zero_is_the_baseline() {
        let dir = tempfile::tempdir().unwrap();
        let report = run_pipeline(&fixture_config(dir.path(), vec![0])).unwrap();
        let (g, r) = (&report.graphs[0], &report.records[0]);
        assert_eq!((r.edges, r.pruned_edges, r.pair_delta), (g.edges, 0, 0));
        assert_eq!(r.reachable_pairs, g.baseline_pairs);
        assert_eq!(r.reachable_fraction, g.baseline_fraction);
    }

    #[test]
    fn failures_do_not_stop_the_corpus() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = fixture_config(dir.path(), vec![0, 1]);
        let mut broken = config.graphs[0].clone();
        broken.name = "missing".into();
        broken.hierarchy = dir.path().join("nope.jsonl");
        config.graphs.insert(0, broken);
        let report = run_pipeline(&config).unwrap();
        assert_eq!(report.failures.len(), 1);
        assert_eq!(report.failures[0].graph, "missing");
        assert_eq!(report.graphs.len(), 1);
        assert_eq!(report.aggregates[1].graphs, 1);
    }

    #[test]
    fn synthetic_corpus_aggregates_and_determinism() {
        let mut config = PipelineConfig::new("synthetic");
        config.synthetic = Some(SyntheticCorpus {
            count: 4,
            params: GenParams {
                type_count: 40,
                seed: 11,
                ..GenParams::default()
            },
        });
        config.sweep = vec![0, 1, 3];
        config.cves = 5;
        config.threads = 2;
        let a = run_pipeline(&config).unwrap();
        assert!(a.failures.is_empty(), "{:?}", a.failures);
        assert_eq!(a.records.len(), 12);
        assert_eq!(a.aggregates, aggregate(&a.records, &[0, 1, 3]));
        assert!(a.records.iter().all(|r| r.analysis_secs.unwrap() >= 0.0));
        let b = run_pipeline(&config).unwrap();
        assert_eq!(a.without_timing().to_json(), b.without_timing().to_json());
        assert!(!a.without_timing().to_json().contains("_secs"));
    }

    #[test]
    fn csv_timing_columns_follow_the_report() {
        let dir = tempfile::tempdir().unwrap();
        let report = run_pipeline(&fixture_config(dir.path(), vec![0, 1])).unwrap();
        let mut timed = Vec::new();
        report.write_records_csv(&mut timed).unwrap();
        let mut bare = Vec::new();
        report.without_timing().write_records_csv(&mut bare).unwrap();
        let (timed, bare) = (String::from_utf8(timed).unwrap(), String::from_utf8(bare).unwrap());
        assert!(timed.lines().next().unwrap().ends_with("analysis_secs,prune_secs"));
        assert!(!bare.contains("secs"));
        let mut agg = Vec::new();
        report.write_aggregates_csv(&mut agg).unwrap();
        assert!(String::from_utf8(agg)
            .unwrap()
            .starts_with("top_n,graphs,nodes_mean,nodes_std"));
    }

    #[test]
    fn stat_is_sample_deviation() {
        let s = Stat::of(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_eq!(s.mean, 5.0);
        assert!((s.std - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
        assert_eq!(Stat::of(&[3.0]), Stat { mean: 3.0, std: 0.0 });
    }

    #[test]
    fn config_defaults_and_errors() {
        let c = PipelineConfig::from_toml("corpus = \"x\"", Path::new("/")).unwrap();
        assert_eq!(c.sweep, DEFAULT_SWEEP.to_vec());
        assert_eq!(
            c.timing,
            TimingConfig {
                warmup: 1,
                repetitions: 3
            }
        );
        assert_eq!(c.mode, PruneMode::Exhaustive);
        let c = PipelineConfig::from_toml(
            "corpus = \"x\"\nmode = \"selective\"\noracle = { kind = \"seeded\", seed = 1, prune_rate = 0.2 }\n[synthetic]\ncount = 2\nparams = { type_count = 30 }\n",
            Path::new("/"),
        )
        .unwrap();
        assert_eq!(
            c.oracle,
            OracleKind::Seeded {
                seed: 1,
                prune_rate: 0.2
            }
        );
        assert_eq!(c.synthetic.unwrap().params.type_count, 30);
        assert!(PipelineConfig::from_toml("corpus = \"x\"\nbogus = 1", Path::new("/")).is_err());
        let mut c = PipelineConfig::new("x");
        c.threshold = 2.0;
        assert!(run_pipeline(&c).is_err());
    }
}
