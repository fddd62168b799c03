//! Command implementations behind the `graphon-lab` binary.
//!
//! Each `cmd_*` function does its own file I/O and returns a value the
//! binary prints, so the commands can also be driven from tests.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use graphon_gcn::analysis::{self, CutMode, CutNormResult};
use graphon_gcn::hypotest::{self, ConvergenceConfig, ConvergenceTable, TestConfig, TrialsOutcome};
use graphon_gcn::{io, sampling, StepGraphon};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const OUT_DIR_ENV: &str = "GRAPHON_LAB_OUT";
pub const DEFAULT_OUT_DIR: &str = "results";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] graphon_gcn::Error),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config {path}: {source}")]
    Config { path: PathBuf, source: serde_json::Error },
    #[error("thread pool: {0}")]
    Pool(String),
    #[error("{0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Provenance record written next to every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub tool_version: String,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub threads: Option<usize>,
    pub outputs: Vec<PathBuf>,
}

fn now_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

/// Hex SHA-256 of the compact JSON serialization with sorted object keys.
pub fn config_hash(doc: &serde_json::Value) -> String {
    // serde_json's default map is a BTreeMap, so keys are already sorted.
    let canonical = serde_json::to_string(doc).expect("JSON values serialize");
    let digest = Sha256::digest(canonical.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// A config document plus its parsed form. `--seed` rewrites the document
/// before hashing, so the manifest hash covers the seed actually used.
struct Loaded<T> {
    doc: serde_json::Value,
    value: T,
}

fn load_config<T: serde::de::DeserializeOwned>(path: &Path, seed: Option<u64>) -> Result<Loaded<T>> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let config_err = |source| CliError::Config {
        path: path.to_path_buf(),
        source,
    };
    let mut doc: serde_json::Value = serde_json::from_str(&text).map_err(config_err)?;
    if let Some(seed) = seed {
        match doc.as_object_mut() {
            Some(obj) => {
                obj.insert("seed".into(), seed.into());
            }
            None => {
                return Err(CliError::Usage(format!(
                    "{}: config must be a JSON object",
                    path.display()
                )))
            }
        }
    }
    let value = serde_json::from_value(doc.clone()).map_err(config_err)?;
    Ok(Loaded { doc, value })
}

fn prepare_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(io_err(path))
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    write_bytes(path, &io::csv_bytes(rows)?)
}

fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<PathBuf> {
    let path = dir.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    write_bytes(&path, json.as_bytes())?;
    Ok(path)
}

fn manifest(
    command: &str,
    doc: &serde_json::Value,
    seed: u64,
    threads: Option<usize>,
    started: u128,
    outputs: Vec<PathBuf>,
) -> RunManifest {
    RunManifest {
        command: command.into(),
        config_hash: config_hash(doc),
        seed,
        tool_version: env!("CARGO_PKG_VERSION").into(),
        started_unix_ms: started,
        finished_unix_ms: now_ms(),
        threads,
        outputs,
    }
}

/// `sample` config.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub graphon: StepGraphon,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    /// Also write the latent points as a JSON array.
    #[serde(default)]
    pub write_latents: bool,
}

pub const EDGE_LIST_FILE: &str = "graph.edges";
pub const LATENTS_FILE: &str = "latents.json";

pub struct SampleReport {
    pub edge_list: PathBuf,
    pub n: usize,
    pub edges: usize,
    pub manifest: RunManifest,
}

pub fn cmd_sample(config: &Path, seed: Option<u64>, out_dir: &Path) -> Result<SampleReport> {
    let started = now_ms();
    let Loaded { doc, value: cfg } = load_config::<SampleConfig>(config, seed)?;
    let latents = sampling::sample_latents(
        cfg.n,
        graphon_gcn::rng::derive_seed(cfg.seed, &[graphon_gcn::rng::purpose::LATENTS]),
    )?;
    let graph = sampling::sample_from_seed(&cfg.graphon, cfg.n, cfg.seed)?;
    prepare_dir(out_dir)?;
    let edge_list = out_dir.join(EDGE_LIST_FILE);
    write_bytes(&edge_list, io::edge_list_string(&graph).as_bytes())?;
    let mut outputs = vec![edge_list.clone()];
    if cfg.write_latents {
        let path = out_dir.join(LATENTS_FILE);
        write_bytes(
            &path,
            serde_json::to_string(&latents).expect("latents serialize").as_bytes(),
        )?;
        outputs.push(path);
    }
    let manifest = manifest("sample", &doc, cfg.seed, None, started, outputs);
    write_manifest(out_dir, &manifest)?;
    Ok(SampleReport {
        edge_list,
        n: graph.n(),
        edges: graph.edge_count(),
        manifest,
    })
}

pub fn load_graphon(path: &Path) -> Result<StepGraphon> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| CliError::Config {
        path: path.to_path_buf(),
        source,
    })
}

pub fn cmd_delta(graphon0: &Path, graphon1: &Path) -> Result<f64> {
    Ok(graphon_gcn::graphon::delta_separation(
        &load_graphon(graphon0)?,
        &load_graphon(graphon1)?,
    ))
}

/// CSV row for a cut norm or cut distance. Index sets are JSON arrays.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutRow {
    pub quantity: &'static str,
    pub value: f64,
    pub exact: bool,
    #[serde(rename = "S")]
    pub s: String,
    #[serde(rename = "T")]
    pub t: String,
    pub permutation: String,
}

fn json_indices(v: &[usize]) -> String {
    serde_json::to_string(v).expect("index lists serialize")
}

fn cut_norm_row(r: &CutNormResult) -> CutRow {
    CutRow {
        quantity: "cut_norm",
        value: r.value,
        exact: r.exact,
        s: json_indices(&r.witness.0),
        t: json_indices(&r.witness.1),
        permutation: String::new(),
    }
}

pub const HEURISTIC_RESTARTS: usize = 8;

/// Cut norm of the adjacency matrix of `graph`, or the cut distance to
/// `other` when given.
pub fn cmd_cutnorm(graph: &Path, other: Option<&Path>, mode: CutMode, seed: u64) -> Result<CutRow> {
    let g = io::load_edge_list(graph)?;
    match other {
        None => {
            let m = g.adjacency.to_dense();
            let r = match mode {
                CutMode::Exact => analysis::cut_norm_exact(m.view())?,
                CutMode::Heuristic => analysis::cut_norm_heuristic(m.view(), HEURISTIC_RESTARTS, seed)?,
            };
            Ok(cut_norm_row(&r))
        }
        Some(other) => {
            let h = io::load_edge_list(other)?;
            let d = analysis::cut_distance_graphs(&g, &h, mode, seed)?;
            Ok(CutRow {
                quantity: "cut_distance",
                value: d.value,
                exact: d.exact,
                s: String::new(),
                t: String::new(),
                permutation: json_indices(&d.permutation),
            })
        }
    }
}

pub fn cut_row_csv(row: &CutRow) -> Result<String> {
    Ok(String::from_utf8(io::csv_bytes(std::slice::from_ref(row))?).expect("csv output is UTF-8"))
}

/// `experiment` config: a trials or convergence config tagged by `kind`.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ExperimentConfig {
    Trials(TestConfig),
    Convergence(ConvergenceConfig),
}

impl ExperimentConfig {
    pub fn seed(&self) -> u64 {
        match self {
            Self::Trials(c) => c.seed,
            Self::Convergence(c) => c.seed,
        }
    }
}

pub const TRIALS_FILE: &str = "trials.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const CONVERGENCE_FILE: &str = "convergence.csv";
pub const CONVERGENCE_TRIALS_FILE: &str = "convergence_trials.csv";

/// Aggregate convergence row with the fitted slopes repeated on each row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceCsvRow {
    pub n: usize,
    #[serde(rename = "K")]
    pub layers: usize,
    pub trials: usize,
    pub linf_median: f64,
    pub n_linf_median: f64,
    pub median_abs_median: f64,
    pub frac_below_median: f64,
    pub linf_slope: Option<f64>,
    pub median_abs_slope: Option<f64>,
}

pub fn convergence_rows(table: &ConvergenceTable) -> Vec<ConvergenceCsvRow> {
    table
        .rows
        .iter()
        .map(|r| ConvergenceCsvRow {
            n: r.n,
            layers: r.layers,
            trials: r.trials,
            linf_median: r.linf_median,
            n_linf_median: r.n_linf_median,
            median_abs_median: r.median_abs_median,
            frac_below_median: r.frac_below_median,
            linf_slope: table.linf_slope,
            median_abs_slope: table.median_abs_slope,
        })
        .collect()
}

pub enum ExperimentResult {
    Trials(TrialsOutcome),
    Convergence(ConvergenceTable),
}

pub struct ExperimentReport {
    pub result: ExperimentResult,
    pub warnings: Vec<String>,
    pub manifest: RunManifest,
}

fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be >= 1".into()));
        }
        builder = builder.num_threads(t);
    }
    builder.build().map_err(|e| CliError::Pool(e.to_string()))
}

pub fn cmd_experiment(
    config: &Path,
    seed: Option<u64>,
    out_dir: &Path,
    threads: Option<usize>,
) -> Result<ExperimentReport> {
    let started = now_ms();
    let Loaded { doc, value: cfg } = load_config::<ExperimentConfig>(config, seed)?;
    let pool = thread_pool(threads)?;
    let (result, warnings) = pool.install(|| -> Result<_> {
        Ok(match &cfg {
            ExperimentConfig::Trials(c) => (ExperimentResult::Trials(hypotest::run_trials(c)?), c.warnings()),
            ExperimentConfig::Convergence(c) => (
                ExperimentResult::Convergence(hypotest::coupled_convergence_experiment(c)?),
                Vec::new(),
            ),
        })
    })?;

    prepare_dir(out_dir)?;
    let outputs = match &result {
        ExperimentResult::Trials(outcome) => {
            let trials = out_dir.join(TRIALS_FILE);
            let summary = out_dir.join(SUMMARY_FILE);
            write_rows(&trials, &outcome.records)?;
            write_rows(&summary, std::slice::from_ref(&outcome.summary))?;
            vec![trials, summary]
        }
        ExperimentResult::Convergence(table) => {
            let rows = out_dir.join(CONVERGENCE_FILE);
            let trials = out_dir.join(CONVERGENCE_TRIALS_FILE);
            write_rows(&rows, &convergence_rows(table))?;
            write_rows(&trials, &table.trials)?;
            vec![rows, trials]
        }
    };
    let manifest = manifest("experiment", &doc, cfg.seed(), threads, started, outputs);
    write_manifest(out_dir, &manifest)?;
    Ok(ExperimentReport {
        result,
        warnings,
        manifest,
    })
}

/// One evaluation of either lower-bound expression.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub bound: &'static str,
    pub n: usize,
    pub delta: Option<f64>,
    pub c: Option<f64>,
    pub eps_res: f64,
    pub value: f64,
    pub vacuous: bool,
}

#[derive(Debug, Clone)]
pub struct BoundsGrid {
    pub n: Vec<usize>,
    pub delta: Vec<f64>,
    pub c: Vec<f64>,
    /// Noise levels in units of 1/n.
    pub eps_scaled: Vec<f64>,
}

impl Default for BoundsGrid {
    fn default() -> Self {
        Self {
            n: vec![500],
            delta: vec![0.3],
            c: vec![0.1, 1.0, 10.0],
            eps_scaled: vec![0.25, 0.5, 1.0, 2.0, 4.0, 8.0],
        }
    }
}

pub fn bound_rows(grid: &BoundsGrid) -> Result<Vec<BoundRow>> {
    let mut rows = Vec::new();
    for &n in &grid.n {
        for &scaled in &grid.eps_scaled {
            let eps = scaled / n as f64;
            for &delta in &grid.delta {
                let lb = analysis::error_lb_delta_pos(delta, eps, n);
                rows.push(BoundRow {
                    bound: "delta_pos",
                    n,
                    delta: Some(delta),
                    c: None,
                    eps_res: eps,
                    value: lb.value,
                    vacuous: lb.vacuous,
                });
            }
            for &c in &grid.c {
                rows.push(BoundRow {
                    bound: "delta_zero",
                    n,
                    delta: None,
                    c: Some(c),
                    eps_res: eps,
                    value: analysis::error_lb_delta_zero(c, eps, n)?,
                    vacuous: false,
                });
            }
        }
    }
    Ok(rows)
}

pub const BOUNDS_FILE: &str = "bounds.csv";

/// Writes `bounds.csv` and a manifest into `out_dir`.
pub fn cmd_bounds(grid: &BoundsGrid, out_dir: &Path) -> Result<Vec<BoundRow>> {
    let started = now_ms();
    let rows = bound_rows(grid)?;
    prepare_dir(out_dir)?;
    let path = out_dir.join(BOUNDS_FILE);
    write_rows(&path, &rows)?;
    let doc = serde_json::json!({
        "n": grid.n, "delta": grid.delta, "c": grid.c, "eps_scaled": grid.eps_scaled,
    });
    write_manifest(out_dir, &manifest("bounds", &doc, 0, None, started, vec![path]))?;
    Ok(rows)
}
