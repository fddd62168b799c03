//! The testing pipeline: draw `B ~ Bernoulli(1/2)`, sample `G ~ W_B`, embed
//! it with a GCN, perturb the embedding and decide between `W_0` and `W_1`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{self, diff_stats, linf_distance, loglog_slope, median, wilson_interval, DiffStats};
use crate::error::{Error, Result};
use crate::gcn::{self, check_norm_budget, Activation, EmbeddingVector, GcnSpec, NormBudget, SpecMatrix};
use crate::graphon::StepGraphon;
use crate::rng::{self, purpose};
use crate::sampling::{self, random_walk_matrix, RandomWalkMatrix};

pub const DEFAULT_DEPTH_CONSTANT: f64 = 10.0;

/// Resampling attempts per trial before an isolated vertex becomes fatal.
pub const MAX_RESAMPLES: u64 = 64;

/// `ceil(depth_constant · ln n)`, at least 1.
pub fn default_layers(n: usize, depth_constant: f64) -> usize {
    ((depth_constant * (n as f64).ln()).ceil() as usize).max(1)
}

/// Linear GCN with `M^(0) = I` (so `d = n`), `K` identity weights and ReLU;
/// budget `(C, E) = (1, K)`.
pub fn linear_gcn_spec(n: usize, layers: usize) -> Result<GcnSpec> {
    if layers == 0 {
        return Err(Error::InvalidParameter("need at least one layer".into()));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need n >= 2, got {n}")));
    }
    Ok(GcnSpec::identity(
        layers,
        Activation::relu(),
        NormBudget {
            c: 1.0,
            e: layers as f64,
        },
    ))
}

/// Weights in a GCN document: `"identity"`, one matrix shared by every
/// layer, or one matrix per layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightsDoc {
    Shared(SpecMatrix),
    PerLayer(Vec<SpecMatrix>),
}

/// JSON form of a [`GcnSpec`]. `K` falls back to the experiment's layer
/// rule; omitted `C`/`E` default to the network's own product and sum bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GcnConfig {
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<usize>,
    pub activation: Activation,
    pub weights: WeightsDoc,
    pub initial: SpecMatrix,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(rename = "E", default, skip_serializing_if = "Option::is_none")]
    pub e: Option<f64>,
}

impl GcnConfig {
    pub fn to_spec(&self, default_layers: usize) -> Result<GcnSpec> {
        let weights = match &self.weights {
            WeightsDoc::Shared(w) => vec![w.clone(); self.layers.unwrap_or(default_layers)],
            WeightsDoc::PerLayer(ws) => {
                if let Some(k) = self.layers.filter(|&k| k != ws.len()) {
                    return Err(Error::InvalidParameter(format!(
                        "K = {k} but {} weight matrices given",
                        ws.len()
                    )));
                }
                ws.clone()
            }
        };
        let mut spec = GcnSpec {
            initial: self.initial.clone(),
            weights,
            activation: self.activation,
            budget: NormBudget {
                c: f64::INFINITY,
                e: f64::INFINITY,
            },
        };
        let report = check_norm_budget(&spec);
        spec.budget = NormBudget {
            c: self.c.unwrap_or(report.product_bound),
            e: self.e.unwrap_or(report.sum_bound),
        };
        Ok(spec)
    }
}

fn resolve_spec(gcn: Option<&GcnConfig>, n: usize, layers: usize) -> Result<GcnSpec> {
    match gcn {
        Some(cfg) => cfg.to_spec(layers),
        None => linear_gcn_spec(n, layers),
    }
}

/// Outcome of [`profile_test`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestOutcome {
    pub decision: u8,
    pub stat0: f64,
    pub stat1: f64,
}

/// Nearest-profile test. The sorted rescaled embedding `n·H` is compared in
/// mean absolute deviation with each hypothesis' normalized degree profile
/// evaluated at `n` equal-mass quantiles; ties go to hypothesis 0.
pub fn profile_test(h: &EmbeddingVector, w0: &StepGraphon, w1: &StepGraphon, n: usize) -> Result<TestOutcome> {
    if h.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "embedding has length {}, expected n = {n}",
            h.len()
        )));
    }
    let mut observed: Vec<f64> = h.values.iter().map(|v| v * n as f64).collect();
    observed.sort_by(f64::total_cmp);
    let stat = |w: &StepGraphon| {
        let expected = w.normalized_degree_profile().quantiles(n);
        observed.iter().zip(&expected).map(|(s, p)| (s - p).abs()).sum::<f64>() / n as f64
    };
    let (stat0, stat1) = (stat(w0), stat(w1));
    Ok(TestOutcome {
        decision: u8::from(stat1 < stat0),
        stat0,
        stat1,
    })
}

/// Monte Carlo configuration for [`run_trials`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    pub w0: StepGraphon,
    pub w1: StepGraphon,
    pub n: usize,
    /// Fixed depth; overrides `depth_constant`.
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<usize>,
    #[serde(default = "default_depth_constant")]
    pub depth_constant: f64,
    pub eps_res: f64,
    /// Defaults to the linear identity/ReLU network.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gcn: Option<GcnConfig>,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Also sample the other hypothesis from the same latents and edge
    /// uniforms and record the ℓ∞ distance between the two embeddings.
    #[serde(default)]
    pub coupled: bool,
}

fn default_depth_constant() -> f64 {
    DEFAULT_DEPTH_CONSTANT
}

impl TestConfig {
    pub fn layers(&self) -> usize {
        self.layers
            .unwrap_or_else(|| default_layers(self.n, self.depth_constant))
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be >= 1".into()));
        }
        if self.n < 2 {
            return Err(Error::InvalidParameter(format!("need n >= 2, got {}", self.n)));
        }
        if self.layers() == 0 {
            return Err(Error::InvalidParameter("need at least one layer".into()));
        }
        if !(self.eps_res >= 0.0 && self.eps_res.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "eps_res = {} must be >= 0",
                self.eps_res
            )));
        }
        let spec = resolve_spec(self.gcn.as_ref(), self.n, self.layers())?;
        let report = check_norm_budget(&spec);
        if !report.satisfied {
            return Err(Error::NormBudget {
                product: report.product_bound,
                sum: report.sum_bound,
                c: spec.budget.c,
                e: spec.budget.e,
            });
        }
        Ok(())
    }

    /// Soft conditions of the lower-bound regime that the run violates.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let k = self.layers() as f64;
        let sqrt_n = (self.n as f64).sqrt();
        if k >= sqrt_n {
            out.push(format!(
                "K = {k} is not small against sqrt(n) = {sqrt_n:.1}; the lower bounds assume K << n^(1/2 - eps)"
            ));
        }
        out
    }
}

/// One Monte Carlo trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial_id: u64,
    #[serde(rename = "B")]
    pub label: u8,
    pub decision: u8,
    pub stat0: f64,
    pub stat1: f64,
    pub n: usize,
    #[serde(rename = "K")]
    pub layers: usize,
    pub eps_res: f64,
    pub seed: u64,
    /// Only in coupled mode.
    pub linf_coupled_diff: Option<f64>,
    pub resamples: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialSummary {
    pub n: usize,
    #[serde(rename = "K")]
    pub layers: usize,
    pub eps_res: f64,
    pub trials: usize,
    pub errors: usize,
    pub error_rate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub resamples: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialsOutcome {
    pub summary: TrialSummary,
    pub records: Vec<TrialRecord>,
}

impl TrialsOutcome {
    pub fn error_rate(&self) -> f64 {
        self.summary.error_rate
    }

    pub fn ci95(&self) -> (f64, f64) {
        (self.summary.ci_lo, self.summary.ci_hi)
    }
}

/// Samples graphs for `graphons` from a shared coupling, retrying with fresh
/// randomness while any sample has an isolated vertex. Returns the walk
/// matrices and the number of retries.
fn coupled_walks(graphons: &[&StepGraphon], n: usize, seed: u64, path: &[u64]) -> Result<(Vec<RandomWalkMatrix>, u64)> {
    for attempt in 0..MAX_RESAMPLES {
        let mut key = path.to_vec();
        key.push(attempt);
        let latents = sampling::sample_latents(n, rng::derive_seed(seed, &[&key[..], &[purpose::LATENTS]].concat()))?;
        let graphs = sampling::sample_coupled(
            graphons,
            &latents,
            rng::derive_seed(seed, &[&key[..], &[purpose::EDGES]].concat()),
        );
        match graphs.iter().map(random_walk_matrix).collect::<Result<Vec<_>>>() {
            Ok(walks) => return Ok((walks, attempt)),
            Err(Error::IsolatedVertex { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::InvalidParameter(format!(
        "every one of {MAX_RESAMPLES} samples had an isolated vertex"
    )))
}

fn run_trial(cfg: &TestConfig, spec: &GcnSpec, layers: usize, trial: u64) -> Result<TrialRecord> {
    use rand::Rng;
    let label = u8::from(rng::derived_rng(cfg.seed, &[trial, purpose::LABEL]).random::<bool>());
    let (truth, other) = if label == 0 {
        (&cfg.w0, &cfg.w1)
    } else {
        (&cfg.w1, &cfg.w0)
    };
    let graphons: Vec<&StepGraphon> = if cfg.coupled { vec![truth, other] } else { vec![truth] };
    let (walks, resamples) = coupled_walks(&graphons, cfg.n, cfg.seed, &[trial])?;

    let clean = gcn::embed(&walks[0], spec)?;
    let linf_coupled_diff = match walks.get(1) {
        Some(walk) => Some(linf_distance(&clean.values, &gcn::embed(walk, spec)?.values)?),
        None => None,
    };
    let noisy = gcn::perturb(
        &clean,
        cfg.eps_res,
        rng::derive_seed(cfg.seed, &[trial, purpose::PERTURB]),
    )?;
    let outcome = profile_test(&noisy, &cfg.w0, &cfg.w1, cfg.n)?;
    Ok(TrialRecord {
        trial_id: trial,
        label,
        decision: outcome.decision,
        stat0: outcome.stat0,
        stat1: outcome.stat1,
        n: cfg.n,
        layers,
        eps_res: cfg.eps_res,
        seed: cfg.seed,
        linf_coupled_diff,
        resamples,
    })
}

/// Runs `cfg.trials` independent trials on the current rayon pool. Records
/// come back in trial order and do not depend on the number of workers.
pub fn run_trials(cfg: &TestConfig) -> Result<TrialsOutcome> {
    cfg.validate()?;
    let layers = cfg.layers();
    let spec = resolve_spec(cfg.gcn.as_ref(), cfg.n, layers)?;
    let records = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            run_trial(cfg, &spec, layers, t).map_err(|e| Error::Trial {
                trial: t,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let errors = records.iter().filter(|r| r.decision != r.label).count();
    let (ci_lo, ci_hi) = wilson_interval(errors, records.len(), 1.96);
    Ok(TrialsOutcome {
        summary: TrialSummary {
            n: cfg.n,
            layers,
            eps_res: cfg.eps_res,
            trials: records.len(),
            errors,
            error_rate: errors as f64 / records.len() as f64,
            ci_lo,
            ci_hi,
            resamples: records.iter().map(|r| r.resamples).sum(),
            seed: cfg.seed,
        },
        records,
    })
}

/// Configuration of [`coupled_convergence_experiment`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    pub w0: StepGraphon,
    pub w1: StepGraphon,
    pub n_grid: Vec<usize>,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<usize>,
    #[serde(default = "default_depth_constant")]
    pub depth_constant: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gcn: Option<GcnConfig>,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// `frac_below` counts coordinates with `|diff| ≤ threshold_scale / n²`.
    #[serde(default = "default_threshold_scale")]
    pub threshold_scale: f64,
}

fn default_threshold_scale() -> f64 {
    1.0
}

impl ConvergenceConfig {
    pub fn layers_for(&self, n: usize) -> usize {
        self.layers.unwrap_or_else(|| default_layers(n, self.depth_constant))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTrial {
    pub n: usize,
    #[serde(rename = "K")]
    pub layers: usize,
    pub trial_id: u64,
    pub linf: f64,
    pub n_linf: f64,
    pub median_abs: f64,
    pub frac_below: f64,
    pub resamples: u64,
}

/// Medians across trials at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    #[serde(rename = "K")]
    pub layers: usize,
    pub trials: usize,
    pub linf_median: f64,
    pub n_linf_median: f64,
    pub median_abs_median: f64,
    pub frac_below_median: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub trials: Vec<ConvergenceTrial>,
    /// Log-log slope of `linf_median` against `n`.
    pub linf_slope: Option<f64>,
    /// Log-log slope of `median_abs_median` against `n`.
    pub median_abs_slope: Option<f64>,
}

/// For every `n` in the grid and every trial: sample a coupled pair, embed
/// both graphs with the same network and record [`DiffStats`] of the clean
/// embeddings.
pub fn coupled_convergence_experiment(cfg: &ConvergenceConfig) -> Result<ConvergenceTable> {
    if cfg.n_grid.is_empty() || cfg.n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "n_grid must be nonempty and strictly ascending".into(),
        ));
    }
    if cfg.trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let jobs: Vec<(usize, u64)> = cfg
        .n_grid
        .iter()
        .flat_map(|&n| (0..cfg.trials as u64).map(move |t| (n, t)))
        .collect();
    let specs = cfg
        .n_grid
        .iter()
        .map(|&n| resolve_spec(cfg.gcn.as_ref(), n, cfg.layers_for(n)))
        .collect::<Result<Vec<_>>>()?;

    let trials = jobs
        .par_iter()
        .map(|&(n, t)| {
            let spec = &specs[cfg.n_grid.iter().position(|&m| m == n).expect("grid point")];
            let (walks, resamples) = coupled_walks(&[&cfg.w0, &cfg.w1], n, cfg.seed, &[n as u64, t])?;
            let h0 = gcn::embed(&walks[0], spec)?;
            let h1 = gcn::embed(&walks[1], spec)?;
            let DiffStats {
                linf,
                median_abs,
                frac_below,
            } = diff_stats(&h0.values, &h1.values, cfg.threshold_scale / (n as f64 * n as f64))?;
            Ok(ConvergenceTrial {
                n,
                layers: spec.layers(),
                trial_id: t,
                linf,
                n_linf: n as f64 * linf,
                median_abs,
                frac_below,
                resamples,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let rows: Vec<ConvergenceRow> = cfg
        .n_grid
        .iter()
        .map(|&n| {
            let at: Vec<&ConvergenceTrial> = trials.iter().filter(|t| t.n == n).collect();
            let med = |f: fn(&ConvergenceTrial) -> f64| median(&at.iter().map(|t| f(t)).collect::<Vec<_>>());
            ConvergenceRow {
                n,
                layers: cfg.layers_for(n),
                trials: at.len(),
                linf_median: med(|t| t.linf),
                n_linf_median: med(|t| t.n_linf),
                median_abs_median: med(|t| t.median_abs),
                frac_below_median: med(|t| t.frac_below),
            }
        })
        .collect();
    let ns: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let linf: Vec<f64> = rows.iter().map(|r| r.linf_median).collect();
    let mid: Vec<f64> = rows.iter().map(|r| r.median_abs_median).collect();
    Ok(ConvergenceTable {
        linf_slope: loglog_slope(&ns, &linf),
        median_abs_slope: loglog_slope(&ns, &mid),
        rows,
        trials,
    })
}

/// Re-exported for callers that only need the lower bounds.
pub use analysis::{error_lb_delta_pos, error_lb_delta_zero};
