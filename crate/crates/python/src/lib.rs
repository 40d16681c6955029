//! Python bindings: `import cimwalk_py`.
//!
//! Structured results (traces, censuses, truths) cross the boundary as JSON
//! strings; graphs are wrapped classes.

use nalgebra::DMatrix;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use cimwalk::algorithms::{self, Algorithm, SearchConfig, Strategy};
use cimwalk::graph::{self, Dag, Mec};
use cimwalk::imset::{full_imset as core_full_imset, restricted_imset};
use cimwalk::moves::{self, Move};
use cimwalk::polytope;
use cimwalk::scoring::{self, LocalScoreCache, SufficientStats};
use cimwalk::simulation;

fn err(e: cimwalk::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json<T: serde::Serialize>(v: &T) -> PyResult<String> {
    serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pyclass(name = "Dag", module = "cimwalk_py", skip_from_py_object, eq, frozen)]
#[derive(Clone, PartialEq)]
pub struct PyDag(pub Dag);

#[pymethods]
impl PyDag {
    #[new]
    fn new(p: usize, arcs: Vec<(usize, usize)>) -> PyResult<Self> {
        Dag::from_arcs(p, &arcs).map(PyDag).map_err(err)
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        graph::parse_graph_text(text).and_then(|g| g.into_dag()).map(PyDag).map_err(err)
    }

    #[getter]
    fn p(&self) -> usize {
        self.0.p()
    }

    fn arcs(&self) -> Vec<(usize, usize)> {
        self.0.arcs()
    }

    fn parents(&self, i: usize) -> PyResult<Vec<usize>> {
        if i >= self.0.p() {
            return Err(PyValueError::new_err(format!("node {i} out of range")));
        }
        Ok(self.0.parents(i).to_vec())
    }

    fn to_text(&self) -> String {
        self.0.to_text()
    }

    fn mec(&self) -> PyMec {
        PyMec(graph::mec_of(&self.0))
    }

    fn __repr__(&self) -> String {
        format!("Dag(p={}, arcs={:?})", self.0.p(), self.0.arcs())
    }
}

#[pyclass(name = "Mec", module = "cimwalk_py", skip_from_py_object, eq, frozen, hash)]
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PyMec(pub Mec);

#[pymethods]
impl PyMec {
    #[staticmethod]
    fn empty(p: usize) -> Self {
        PyMec(Mec::empty(p))
    }

    #[getter]
    fn p(&self) -> usize {
        self.0.p()
    }

    fn skeleton(&self) -> Vec<(usize, usize)> {
        self.0.skeleton().edges()
    }

    /// `(tail, collider, tail)` triples.
    fn vstructures(&self) -> Vec<(usize, usize, usize)> {
        self.0
            .vstructs()
            .iter()
            .map(|v| (v.tails.0, v.collider, v.tails.1))
            .collect()
    }

    /// `(compelled arcs, reversible edges)`.
    fn essential_graph(&self) -> PyResult<(Vec<(usize, usize)>, Vec<(usize, usize)>)> {
        let e = graph::essential_graph(&self.0).map_err(err)?;
        Ok((e.arcs.into_iter().collect(), e.undirected.into_iter().collect()))
    }

    fn representative(&self) -> PyResult<PyDag> {
        graph::consistent_extension(&self.0)
            .map(PyDag)
            .ok_or_else(|| PyValueError::new_err("pattern is not realizable"))
    }

    /// Ones of the restricted characteristic imset, as sorted node lists.
    fn restricted_imset(&self) -> PyResult<Vec<Vec<usize>>> {
        let d = self.representative()?;
        Ok(restricted_imset(&d.0).ones().iter().map(|k| k.to_vec()).collect())
    }

    fn turn_moves(&self) -> PyResult<Vec<PyMove>> {
        Ok(wrap(moves::enumerate_turn_moves(&self.0, None)))
    }

    fn edge_moves(&self) -> PyResult<Vec<PyMove>> {
        Ok(wrap(moves::enumerate_edge_moves(&self.0, None)))
    }

    fn __repr__(&self) -> String {
        format!("Mec(p={}, skeleton={:?}, vstructures={:?})", self.0.p(), self.0.skeleton().edges(), self.vstructures())
    }
}

#[pyclass(name = "Move", module = "cimwalk_py", skip_from_py_object, frozen)]
#[derive(Clone)]
pub struct PyMove {
    mv: Move,
    target: Mec,
}

fn wrap(v: Vec<(Move, Mec)>) -> Vec<PyMove> {
    v.into_iter().map(|(mv, target)| PyMove { mv, target }).collect()
}

#[pymethods]
impl PyMove {
    #[getter]
    fn kind(&self) -> String {
        format!("{:?}", self.mv.kind)
    }

    #[getter]
    fn target(&self) -> PyMec {
        PyMec(self.target.clone())
    }

    /// Parameters and signed imset delta as JSON.
    fn to_json(&self) -> PyResult<String> {
        json(&self.mv)
    }

    fn __repr__(&self) -> String {
        format!("Move({:?}, {:?})", self.mv.kind, self.mv.params)
    }
}

#[pyclass(name = "Stats", module = "cimwalk_py", frozen)]
pub struct PyStats {
    stats: SufficientStats,
    cache: LocalScoreCache,
}

#[pymethods]
impl PyStats {
    #[staticmethod]
    fn from_csv(path: &str) -> PyResult<Self> {
        SufficientStats::from_csv(path).map(Self::wrap).map_err(err)
    }

    /// Rows of observations.
    #[staticmethod]
    fn from_rows(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(PyValueError::new_err("rows have unequal lengths"));
        }
        let m = DMatrix::from_fn(n, p, |r, c| rows[r][c]);
        SufficientStats::from_data(&m).map(Self::wrap).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.stats.n()
    }

    #[getter]
    fn p(&self) -> usize {
        self.stats.p()
    }

    fn score_dag(&self, dag: &PyDag) -> PyResult<f64> {
        scoring::score_dag(&dag.0, &self.stats, &self.cache).map_err(err)
    }

    fn score_mec(&self, mec: &PyMec) -> PyResult<f64> {
        scoring::score_mec(&mec.0, &self.stats, &self.cache).map_err(err)
    }

    #[pyo3(signature = (alpha = cimwalk::ci_tests::DEFAULT_ALPHA))]
    fn pc_skeleton(&self, alpha: f64) -> PyResult<Vec<(usize, usize)>> {
        cimwalk::ci_tests::pc_skeleton(&self.stats, alpha).map(|g| g.edges()).map_err(err)
    }

    /// Returns `(mec, trace_json)`.
    #[pyo3(signature = (algo = "greedy-cim", strategy = "first-improvement", alpha = cimwalk::ci_tests::DEFAULT_ALPHA, seed = 0))]
    fn discover(&self, algo: &str, strategy: &str, alpha: f64, seed: u64) -> PyResult<(PyMec, String)> {
        let algo = match algo {
            "greedy-cim" => Algorithm::GreedyCim,
            "skeletal-greedy-cim" => Algorithm::SkeletalGreedyCim,
            "recurrent-cim" => Algorithm::RecurrentCim,
            other => return Err(PyValueError::new_err(format!("algo: unknown {other:?}"))),
        };
        let strategy = match strategy {
            "first-improvement" => Strategy::FirstImprovement,
            "best-improvement" => Strategy::BestImprovement,
            other => return Err(PyValueError::new_err(format!("strategy: unknown {other:?}"))),
        };
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(PyValueError::new_err("alpha must lie in (0, 1)"));
        }
        let config = SearchConfig {
            strategy,
            alpha,
            seed,
            ..Default::default()
        };
        let (mec, trace) = algorithms::discover(algo, &self.stats, &config).map_err(err)?;
        Ok((PyMec(mec), json(&trace)?))
    }
}

impl PyStats {
    fn wrap(stats: SufficientStats) -> Self {
        PyStats {
            stats,
            cache: LocalScoreCache::new(),
        }
    }
}

/// Ones of the full characteristic imset of `dag`.
#[pyfunction]
fn full_imset(dag: &PyDag) -> PyResult<Vec<Vec<usize>>> {
    let c = core_full_imset(&dag.0).map_err(err)?;
    Ok(c.ones().iter().map(|k| k.to_vec()).collect())
}

#[pyfunction]
fn markov_equivalent(a: &PyDag, b: &PyDag) -> bool {
    graph::markov_equivalent(&a.0, &b.0)
}

#[pyfunction]
fn shd(a: &PyMec, b: &PyMec) -> PyResult<usize> {
    graph::shd(&a.0, &b.0).map_err(err)
}

/// Returns `(rows, truth_json)` for a random linear Gaussian SEM.
#[pyfunction]
fn simulate(p: usize, d: f64, n: usize, seed: u64) -> PyResult<(Vec<Vec<f64>>, String)> {
    let mut rng = simulation::seeded_rng(seed);
    let dag = simulation::random_dag(p, d, &mut rng).map_err(err)?;
    let model = simulation::assign_weights(&dag, &mut rng);
    let (data, _) = simulation::sample(&model, n, &mut rng).map_err(err)?;
    let rows = (0..data.nrows()).map(|r| data.row(r).iter().copied().collect()).collect();
    Ok((rows, json(&model.truth())?))
}

/// Edge census of `CIM_p` (p <= 4) as JSON.
#[pyfunction]
fn census(p: usize) -> PyResult<String> {
    if p > 4 {
        return Err(PyValueError::new_err("census supports p <= 4"));
    }
    let vs = polytope::enumerate_mecs(p).map_err(err)?;
    let (c, _) = polytope::census(&vs).map_err(err)?;
    json(&c)
}

#[pymodule]
pub fn cimwalk_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDag>()?;
    m.add_class::<PyMec>()?;
    m.add_class::<PyMove>()?;
    m.add_class::<PyStats>()?;
    m.add_function(wrap_pyfunction!(full_imset, m)?)?;
    m.add_function(wrap_pyfunction!(markov_equivalent, m)?)?;
    m.add_function(wrap_pyfunction!(shd, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(census, m)?)?;
    Ok(())
}
