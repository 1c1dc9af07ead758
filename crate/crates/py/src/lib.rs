//! Python bindings for the expander decomposition core.

use expander_core::decomposition::{trim_report, CertMethod};
use expander_core::gen::{dumbbell, planted, random_regular, Part};
use expander_core::graph::{conductance, Cut};
use expander_core::io::{parse_edge_list, write_edge_list};
use expander_core::oracles::brute_force_min_conductance;
use expander_core::{CaseKind, Error, GameOptions, Mode, MultiGraph, ParamSpec};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Internal(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn spec(phi: f64, seed: u64, mode: &str) -> PyResult<ParamSpec> {
    let mode: Mode = mode.parse().map_err(PyValueError::new_err)?;
    Ok(ParamSpec { phi, mode, seed, overrides: Default::default() })
}

/// Undirected multigraph; self-loops and parallel edges allowed.
#[pyclass(name = "Graph", module = "expander_py", frozen)]
#[derive(Clone)]
struct PyGraph {
    g: MultiGraph,
}

#[pymethods]
impl PyGraph {
    #[new]
    fn new(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        MultiGraph::new(n, edges).map(|g| PyGraph { g }).map_err(to_py)
    }

    #[staticmethod]
    fn from_edge_list(text: &str) -> PyResult<Self> {
        parse_edge_list(text).map(|g| PyGraph { g }).map_err(to_py)
    }

    #[staticmethod]
    #[pyo3(signature = (n, d, seed=0, simple=false))]
    fn random_regular(n: usize, d: usize, seed: u64, simple: bool) -> PyResult<Self> {
        random_regular(n, d, seed, simple).map(|g| PyGraph { g }).map_err(to_py)
    }

    #[staticmethod]
    fn dumbbell(n: usize) -> Self {
        PyGraph { g: dumbbell(n) }
    }

    /// `k` parts of `n` vertices joined by `b` bridges; cliques unless a
    /// part degree is given.
    #[staticmethod]
    #[pyo3(signature = (k, n, b, degree=None, seed=0))]
    fn planted(k: usize, n: usize, b: usize, degree: Option<usize>, seed: u64) -> PyResult<Self> {
        let part = degree.map_or(Part::Complete, Part::Regular);
        planted(k, n, part, b, seed).map(|g| PyGraph { g }).map_err(to_py)
    }

    fn to_edge_list(&self) -> String {
        write_edge_list(&self.g)
    }

    #[getter]
    fn n(&self) -> usize {
        self.g.n()
    }

    #[getter]
    fn m(&self) -> usize {
        self.g.m()
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.g.edges().to_vec()
    }

    fn degree(&self, v: usize) -> PyResult<usize> {
        if v >= self.g.n() {
            return Err(PyValueError::new_err(format!("vertex {v} out of range")));
        }
        Ok(self.g.degree(v))
    }

    fn volume(&self, s: Vec<usize>) -> PyResult<u64> {
        self.g.volume(&s).map_err(to_py)
    }

    fn conductance(&self, s: Vec<usize>) -> PyResult<f64> {
        let cut = Cut::new(self.g.n(), &s).map_err(to_py)?;
        conductance(&self.g, &cut).map_err(to_py)
    }

    fn is_connected(&self) -> bool {
        self.g.is_connected()
    }

    fn __repr__(&self) -> String {
        format!("Graph(n={}, m={})", self.g.n(), self.g.m())
    }
}

#[pyclass(name = "Partition", module = "expander_py", frozen, get_all)]
struct PyPartition {
    clusters: Vec<Vec<usize>>,
    inter_cluster_edges: u64,
    rounds_total: usize,
    bound: f64,
    seed: u64,
    /// Per cluster: (size, vol, cert_method, cert_value).
    per_cluster: Vec<(usize, u64, String, f64)>,
}

#[pymethods]
impl PyPartition {
    fn labels(&self) -> Vec<usize> {
        let n = self.clusters.iter().map(Vec::len).sum();
        let mut l = vec![0; n];
        for (i, c) in self.clusters.iter().enumerate() {
            for &v in c {
                l[v] = i;
            }
        }
        l
    }

    fn __len__(&self) -> usize {
        self.clusters.len()
    }

    fn __repr__(&self) -> String {
        format!("Partition(clusters={}, inter_cluster_edges={})", self.clusters.len(), self.inter_cluster_edges)
    }
}

#[pyclass(name = "GameOutcome", module = "expander_py", frozen, get_all)]
struct PyGameOutcome {
    case: String,
    a: Vec<usize>,
    r: Vec<usize>,
    rounds: usize,
    vol_r: u64,
    guard: f64,
    early_stop: bool,
    c: u64,
    cut_conductance: Option<f64>,
    max_load: u64,
    /// Potential after each round when tracked.
    psi: Vec<f64>,
}

#[pymethods]
impl PyGameOutcome {
    fn __repr__(&self) -> String {
        format!("GameOutcome(case={:?}, rounds={})", self.case, self.rounds)
    }
}

fn case_name(c: CaseKind) -> &'static str {
    match c {
        CaseKind::Certified => "certified",
        CaseKind::BalancedCut => "balanced_cut",
        CaseKind::UnbalancedNearExpander => "unbalanced_near_expander",
        CaseKind::TooSmall => "too_small",
    }
}

/// Expander decomposition with conductance parameter `phi`.
#[pyfunction]
#[pyo3(signature = (graph, phi, seed=0, mode="desk"))]
fn decompose(py: Python<'_>, graph: &PyGraph, phi: f64, seed: u64, mode: &str) -> PyResult<PyPartition> {
    let spec = spec(phi, seed, mode)?;
    let p = py.allow_threads(|| expander_core::decomp(&graph.g, &spec)).map_err(to_py)?;
    let per_cluster = p
        .per_cluster
        .iter()
        .map(|c| {
            let method = match c.cert_method {
                CertMethod::Brute => "brute",
                CertMethod::Eigenvalue => "eigenvalue",
                CertMethod::GameCertified => "game-certified",
            };
            (c.size, c.vol, method.to_string(), c.cert_value)
        })
        .collect();
    Ok(PyPartition {
        clusters: p.clusters,
        inter_cluster_edges: p.inter_cluster_edges,
        rounds_total: p.rounds_total,
        bound: p.bound,
        seed: p.seed,
        per_cluster,
    })
}

/// One cut-matching game on a connected graph.
#[pyfunction]
#[pyo3(signature = (graph, phi, seed=0, mode="desk", track_potential=false))]
fn cut_matching(
    py: Python<'_>,
    graph: &PyGraph,
    phi: f64,
    seed: u64,
    mode: &str,
    track_potential: bool,
) -> PyResult<PyGameOutcome> {
    let params = spec(phi, seed, mode)?.resolve(graph.g.m()).map_err(to_py)?;
    let opts = GameOptions { track_potential, ..GameOptions::default() };
    let out = py.allow_threads(|| expander_core::cut_matching(&graph.g, &params, opts)).map_err(to_py)?;
    Ok(PyGameOutcome {
        case: case_name(out.case).to_string(),
        cut_conductance: out.cut_conductance(&graph.g),
        max_load: out.max_cumulative_load(),
        psi: out.trace.iter().filter_map(|r| r.psi).collect(),
        a: out.a,
        r: out.r,
        rounds: out.rounds,
        vol_r: out.vol_r,
        guard: out.guard,
        early_stop: out.early_stop,
        c: params.c,
    })
}

/// Trims `a` to a set that is a `phi/6` expander in `G{A'}`; returns the
/// kept vertices.
#[pyfunction]
fn trim(graph: &PyGraph, a: Vec<usize>, phi: f64) -> PyResult<Vec<usize>> {
    trim_report(&graph.g, &a, phi).map(|r| r.kept).map_err(to_py)
}

/// Exact minimum conductance and a witness side, by enumeration.
#[pyfunction]
fn min_conductance(graph: &PyGraph) -> PyResult<Option<(f64, Vec<usize>)>> {
    let best = brute_force_min_conductance(&graph.g).map_err(to_py)?;
    Ok(best.map(|(r, s)| (*r.numer() as f64 / *r.denom() as f64, s)))
}

/// Game parameters resolved for a graph with `m` edges.
#[pyfunction]
#[pyo3(signature = (phi, m, mode="desk", seed=0))]
fn resolve_params<'py>(py: Python<'py>, phi: f64, m: usize, mode: &str, seed: u64) -> PyResult<Bound<'py, PyDict>> {
    let p = spec(phi, seed, mode)?.resolve(m).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("phi", p.phi)?;
    d.set_item("T", p.rounds)?;
    d.set_item("Z", p.z)?;
    d.set_item("c", p.c)?;
    d.set_item("d", p.d)?;
    d.set_item("h", p.h)?;
    d.set_item("mode", mode)?;
    d.set_item("seed", p.seed)?;
    Ok(d)
}

#[pymodule]
fn expander_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyPartition>()?;
    m.add_class::<PyGameOutcome>()?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(cut_matching, m)?)?;
    m.add_function(wrap_pyfunction!(trim, m)?)?;
    m.add_function(wrap_pyfunction!(min_conductance, m)?)?;
    m.add_function(wrap_pyfunction!(resolve_params, m)?)?;
    Ok(())
}
