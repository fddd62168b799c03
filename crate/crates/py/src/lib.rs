//! Python bindings: graphons, sampling, embeddings, distances, bounds and
//! Monte Carlo experiments. Experiment configs and results cross the
//! boundary as JSON documents decoded into Python objects.

use graphon_gcn::analysis::{self, CutMode};
use graphon_gcn::gcn::{self, EmbeddingVector};
use graphon_gcn::hypotest::{self, ConvergenceConfig, TestConfig, DEFAULT_DEPTH_CONSTANT};
use graphon_gcn::{graphon, io, sampling, FamilyPoint, SbmParams};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyAny;

fn err(e: graphon_gcn::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_mode(mode: &str) -> PyResult<CutMode> {
    mode.parse()
        .map_err(|e: graphon_gcn::Error| PyValueError::new_err(e.to_string()))
}

fn to_python<'py>(py: Python<'py>, value: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(json_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Piecewise-constant graphon on consecutive blocks of `[0, 1]`.
#[pyclass(name = "StepGraphon", module = "graphon_lab", frozen)]
struct PyStepGraphon(graphon_gcn::StepGraphon);

#[pymethods]
impl PyStepGraphon {
    #[new]
    #[pyo3(signature = (block_masses, values, lower_bound=None))]
    fn new(block_masses: Vec<f64>, values: Vec<Vec<f64>>, lower_bound: Option<f64>) -> PyResult<Self> {
        graphon_gcn::StepGraphon::new(block_masses, values, lower_bound)
            .map(Self)
            .map_err(err)
    }

    #[staticmethod]
    fn sbm(k1: f64, p1: f64, p2: f64, q: f64) -> PyResult<Self> {
        SbmParams::new(k1, p1, p2, q)
            .and_then(|p| p.to_graphon())
            .map(Self)
            .map_err(err)
    }

    /// Member `tau` of the equal-degree family through `base = (p1, p2, q)`.
    #[staticmethod]
    fn family(base: [f64; 3], k1: f64, tau: f64) -> PyResult<Self> {
        FamilyPoint::new(base, k1, tau)
            .and_then(|f| f.to_sbm())
            .and_then(|p| p.to_graphon())
            .map(Self)
            .map_err(err)
    }

    #[staticmethod]
    fn constant(p: f64) -> PyResult<Self> {
        graphon_gcn::StepGraphon::constant(p).map(Self).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text).map(Self).map_err(json_err)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(json_err)
    }

    #[getter]
    fn block_masses(&self) -> Vec<f64> {
        self.0.block_masses().to_vec()
    }

    #[getter]
    fn values(&self) -> Vec<Vec<f64>> {
        self.0.values()
    }

    #[getter]
    fn lower_bound(&self) -> f64 {
        self.0.lower_bound()
    }

    fn kernel(&self, x: f64, y: f64) -> f64 {
        self.0.kernel(x, y)
    }

    fn degree_function(&self) -> Vec<f64> {
        self.0.degree_function()
    }

    fn total_degree(&self) -> f64 {
        self.0.total_degree()
    }

    /// `(masses, levels)` of the sorted normalized degree profile.
    fn normalized_degree_profile(&self) -> (Vec<f64>, Vec<f64>) {
        let p = self.0.normalized_degree_profile();
        (p.masses.clone(), p.levels.clone())
    }

    fn __repr__(&self) -> String {
        format!("StepGraphon({})", serde_json::to_string(&self.0).unwrap_or_default())
    }
}

/// Simple undirected graph, optionally carrying its latent points.
#[pyclass(name = "Graph", module = "graphon_lab", frozen)]
struct PyGraph(sampling::SampleGraph);

#[pymethods]
impl PyGraph {
    #[new]
    fn new(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        sampling::SampleGraph::from_edges(n, edges).map(Self).map_err(err)
    }

    #[staticmethod]
    fn from_edge_list(text: &str) -> PyResult<Self> {
        io::read_edge_list(text.as_bytes()).map(Self).map_err(err)
    }

    fn to_edge_list(&self) -> String {
        io::edge_list_string(&self.0)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn latents(&self) -> Option<Vec<f64>> {
        self.0.latents.as_ref().map(|l| l.as_slice().to_vec())
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.0.adjacency.edges().collect()
    }

    fn edge_count(&self) -> usize {
        self.0.edge_count()
    }

    fn edge_density(&self) -> f64 {
        self.0.edge_density()
    }

    fn degrees(&self) -> Vec<usize> {
        self.0.degrees()
    }

    /// Row-stochastic random walk matrix as nested lists.
    fn random_walk_matrix(&self) -> PyResult<Vec<Vec<f64>>> {
        let walk = sampling::random_walk_matrix(&self.0).map_err(err)?;
        Ok(walk.entries().rows().into_iter().map(|r| r.to_vec()).collect())
    }

    fn stationary_distribution(&self) -> PyResult<Vec<f64>> {
        analysis::stationary_distribution(&self.0).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Graph(n={}, m={})", self.0.n(), self.0.edge_count())
    }
}

#[pyfunction]
fn delta_separation(w0: &PyStepGraphon, w1: &PyStepGraphon) -> f64 {
    graphon::delta_separation(&w0.0, &w1.0)
}

#[pyfunction]
fn sample_graph(w: &PyStepGraphon, n: usize, seed: u64) -> PyResult<PyGraph> {
    sampling::sample_from_seed(&w.0, n, seed).map(PyGraph).map_err(err)
}

/// Two graphs sharing latent points and edge uniforms.
#[pyfunction]
fn sample_coupled_pair(w0: &PyStepGraphon, w1: &PyStepGraphon, n: usize, seed: u64) -> PyResult<(PyGraph, PyGraph)> {
    let (g0, g1) = sampling::sample_coupled_pair(&w0.0, &w1.0, n, seed).map_err(err)?;
    Ok((PyGraph(g0), PyGraph(g1)))
}

/// Embedding vector of the linear identity/ReLU network with `layers`
/// layers (default `ceil(10 ln n)`).
#[pyfunction]
#[pyo3(signature = (graph, layers=None))]
fn embed(graph: &PyGraph, layers: Option<usize>) -> PyResult<Vec<f64>> {
    let n = graph.0.n();
    let layers = layers.unwrap_or_else(|| hypotest::default_layers(n, DEFAULT_DEPTH_CONSTANT));
    let spec = hypotest::linear_gcn_spec(n, layers).map_err(err)?;
    let walk = sampling::random_walk_matrix(&graph.0).map_err(err)?;
    gcn::embed(&walk, &spec).map(|h| h.values).map_err(err)
}

#[pyfunction]
fn perturb(values: Vec<f64>, eps_res: f64, seed: u64) -> PyResult<Vec<f64>> {
    gcn::perturb(&EmbeddingVector::new(values), eps_res, seed)
        .map(|h| h.values)
        .map_err(err)
}

/// `(decision, stat0, stat1)` of the sorted-profile test.
#[pyfunction]
fn profile_test(values: Vec<f64>, w0: &PyStepGraphon, w1: &PyStepGraphon) -> PyResult<(u8, f64, f64)> {
    let n = values.len();
    let out = hypotest::profile_test(&EmbeddingVector::new(values), &w0.0, &w1.0, n).map_err(err)?;
    Ok((out.decision, out.stat0, out.stat1))
}

/// `(value, S, T, exact)` for a square matrix given as nested lists.
#[pyfunction]
#[pyo3(signature = (matrix, mode="exact", restarts=8, seed=0))]
fn cut_norm(
    matrix: Vec<Vec<f64>>,
    mode: &str,
    restarts: usize,
    seed: u64,
) -> PyResult<(f64, Vec<usize>, Vec<usize>, bool)> {
    let n = matrix.len();
    if matrix.iter().any(|row| row.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    let flat: Vec<f64> = matrix.into_iter().flatten().collect();
    let m = ndarray::Array2::from_shape_vec((n, n), flat).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let r = match parse_mode(mode)? {
        CutMode::Exact => analysis::cut_norm_exact(m.view()),
        CutMode::Heuristic => analysis::cut_norm_heuristic(m.view(), restarts, seed),
    }
    .map_err(err)?;
    Ok((r.value, r.witness.0, r.witness.1, r.exact))
}

/// `(value, permutation, exact)`.
#[pyfunction]
#[pyo3(signature = (g0, g1, mode="heuristic", seed=0))]
fn cut_distance(g0: &PyGraph, g1: &PyGraph, mode: &str, seed: u64) -> PyResult<(f64, Vec<usize>, bool)> {
    let d = analysis::cut_distance_graphs(&g0.0, &g1.0, parse_mode(mode)?, seed).map_err(err)?;
    Ok((d.value, d.permutation, d.exact))
}

/// `(value, vacuous)`.
#[pyfunction]
fn error_lb_delta_pos(delta: f64, eps_res: f64, n: usize) -> (f64, bool) {
    let lb = analysis::error_lb_delta_pos(delta, eps_res, n);
    (lb.value, lb.vacuous)
}

#[pyfunction]
fn error_lb_delta_zero(c: f64, eps_res: f64, n: usize) -> PyResult<f64> {
    analysis::error_lb_delta_zero(c, eps_res, n).map_err(err)
}

/// Runs a trials config (JSON text); returns `{"summary": ..., "records": [...]}`.
#[pyfunction]
fn run_trials<'py>(py: Python<'py>, config: &str) -> PyResult<Bound<'py, PyAny>> {
    let cfg: TestConfig = serde_json::from_str(config).map_err(json_err)?;
    let out = py.detach(|| hypotest::run_trials(&cfg)).map_err(err)?;
    to_python(
        py,
        &serde_json::json!({ "summary": out.summary, "records": out.records }),
    )
}

/// Runs a convergence config (JSON text); returns rows, per-trial stats and
/// fitted slopes.
#[pyfunction]
fn coupled_convergence<'py>(py: Python<'py>, config: &str) -> PyResult<Bound<'py, PyAny>> {
    let cfg: ConvergenceConfig = serde_json::from_str(config).map_err(json_err)?;
    let t = py
        .detach(|| hypotest::coupled_convergence_experiment(&cfg))
        .map_err(err)?;
    to_python(
        py,
        &serde_json::json!({
            "rows": t.rows,
            "trials": t.trials,
            "linf_slope": t.linf_slope,
            "median_abs_slope": t.median_abs_slope,
        }),
    )
}

#[pymodule]
fn graphon_lab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyStepGraphon>()?;
    m.add_class::<PyGraph>()?;
    m.add_function(wrap_pyfunction!(delta_separation, m)?)?;
    m.add_function(wrap_pyfunction!(sample_graph, m)?)?;
    m.add_function(wrap_pyfunction!(sample_coupled_pair, m)?)?;
    m.add_function(wrap_pyfunction!(embed, m)?)?;
    m.add_function(wrap_pyfunction!(perturb, m)?)?;
    m.add_function(wrap_pyfunction!(profile_test, m)?)?;
    m.add_function(wrap_pyfunction!(cut_norm, m)?)?;
    m.add_function(wrap_pyfunction!(cut_distance, m)?)?;
    m.add_function(wrap_pyfunction!(error_lb_delta_pos, m)?)?;
    m.add_function(wrap_pyfunction!(error_lb_delta_zero, m)?)?;
    m.add_function(wrap_pyfunction!(run_trials, m)?)?;
    m.add_function(wrap_pyfunction!(coupled_convergence, m)?)?;
    Ok(())
}
