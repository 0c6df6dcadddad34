use pyo3::exceptions::{PyMemoryError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ibn::experiment::{self, ExperimentConfig};
use ibn::firefighter::lambda_c_estimate;
use ibn::flow_cut::{self, CutSource, DepthSchedule, EdgeWeightProfile, Sweep};
use ibn::generators::{self, DEFAULT_MEMORY_CAP};
use ibn::grigorchuk::{self, Word};
use ibn::nathanson;
use ibn::percolation::{self, PercolationLaw};
use ibn::walks::{self, ConductanceField, Network};

fn err(e: ibn::Error) -> PyErr {
    match e {
        ibn::Error::MemoryCap { .. } => PyMemoryError::new_err(e.to_string()),
        ibn::Error::Io(_) | ibn::Error::Csv(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// A finite rooted tree held in memory.
#[pyclass(name = "Tree", module = "pyibn", frozen)]
struct PyTree {
    inner: ibn::tree::Tree,
}

#[pymethods]
impl PyTree {
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        ibn::tree::Tree::from_text(text).map(|inner| Self { inner }).map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (depth, memory_cap = DEFAULT_MEMORY_CAP))]
    fn three_one(depth: usize, memory_cap: usize) -> PyResult<Self> {
        generators::three_one_stretched(depth, memory_cap).map(|inner| Self { inner }).map_err(err)
    }

    #[staticmethod]
    fn random(seed: u64, depth: usize, max_children: u64, dead_end: f64) -> Self {
        Self { inner: generators::random_tree(seed, depth, max_children, dead_end) }
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn height(&self) -> usize {
        self.inner.height()
    }

    fn level_sizes(&self) -> Vec<usize> {
        self.inner.level_sizes()
    }

    fn children(&self, v: usize) -> PyResult<Vec<usize>> {
        if v >= self.inner.len() {
            return Err(err(ibn::Error::UnknownVertex(v)));
        }
        Ok(self.inner.children(v).to_vec())
    }

    /// `(value, cut edges by child vertex)` for weights `exp(-|e|^λ)`.
    fn min_cut(&self, lam: f64, frontier: usize) -> PyResult<(f64, Vec<usize>)> {
        let (v, cut) = flow_cut::min_cut(&self.inner, &EdgeWeightProfile::Ibn { lambda: lam }, frontier).map_err(err)?;
        Ok((v.value(), cut.edges.iter().map(|e| e.child()).collect()))
    }

    fn __repr__(&self) -> String {
        format!("Tree(len={}, height={})", self.inner.len(), self.inner.height())
    }
}

/// A spherically symmetric tree given by its child count at each depth.
#[pyclass(name = "DegreeSequence", module = "pyibn", frozen)]
struct PyDegreeSequence {
    inner: generators::DegreeSequence,
}

#[pymethods]
impl PyDegreeSequence {
    #[staticmethod]
    fn sequence_tree(horizon: usize) -> Self {
        Self { inner: generators::DegreeSequence::sequence_tree(horizon) }
    }

    #[staticmethod]
    fn constant(k: u32, horizon: usize) -> PyResult<Self> {
        generators::DegreeSequence::constant(k, horizon).map(|inner| Self { inner }).map_err(err)
    }

    #[staticmethod]
    fn from_marks(marks: Vec<bool>) -> Self {
        Self { inner: generators::DegreeSequence::from_marks(&marks) }
    }

    fn horizon(&self) -> usize {
        self.inner.horizon()
    }

    fn degrees(&self) -> Vec<u32> {
        self.inner.degrees().to_vec()
    }

    fn level_size(&self, n: usize) -> num_bigint::BigUint {
        self.inner.level_size(n)
    }

    fn ball_size(&self, n: usize) -> num_bigint::BigUint {
        self.inner.ball_size(n)
    }

    #[pyo3(signature = (depth, memory_cap = DEFAULT_MEMORY_CAP))]
    fn to_tree(&self, depth: usize, memory_cap: usize) -> PyResult<PyTree> {
        generators::spherically_symmetric(&self.inner, depth, memory_cap).map(|inner| PyTree { inner }).map_err(err)
    }

    fn min_cut(&self, lam: f64, frontier: usize) -> PyResult<f64> {
        self.inner.min_cut_value(&EdgeWeightProfile::Ibn { lambda: lam }, frontier).map(|v| v.value()).map_err(err)
    }

    fn effective_conductance(&self, lam: f64, n: usize) -> PyResult<f64> {
        self.inner.effective_conductance(&ConductanceField::Deterministic { lambda: lam }, n).map(|v| v.value()).map_err(err)
    }

    fn survival(&self, lam: f64, n: usize) -> PyResult<f64> {
        let law = PercolationLaw::depth(lam).map_err(err)?;
        percolation::exact_survival(&self.inner, &law, n).map(|v| v.value()).map_err(err)
    }

    /// Fraction of `trials` walks that return to the root within `step_cap` steps.
    fn return_frequency(&self, lam: f64, trials: u64, step_cap: u64, seed: u64) -> PyResult<f64> {
        let chain = walks::DepthChain::new(&self.inner, &ConductanceField::Deterministic { lambda: lam }).map_err(err)?;
        Ok(walks::summarize(&chain.trials(step_cap, trials, seed)).frequency)
    }

    fn lambda_c(&self, py: Python<'_>, k: usize, gammas: Vec<f64>, factor: f64, horizons: Vec<usize>) -> PyResult<Py<PyDict>> {
        let sweep = lambda_c_estimate(&self.inner, k, &gammas, factor, &horizons).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("lower", sweep.bracket.lower)?;
        d.set_item("upper", sweep.bracket.upper)?;
        let contained: Vec<(f64, usize, bool)> =
            sweep.attempts.iter().map(|a| (a.gamma, a.horizon, a.outcome.verdict.contained())).collect();
        d.set_item("attempts", contained)?;
        Ok(d.unbind())
    }

    fn __repr__(&self) -> String {
        format!("DegreeSequence(horizon={})", self.inner.horizon())
    }
}

fn sweep_dict(py: Python<'_>, s: &Sweep) -> PyResult<Py<PyDict>> {
    let d = PyDict::new(py);
    d.set_item("lower", s.bracket.lower)?;
    d.set_item("upper", s.bracket.upper)?;
    d.set_item("undecided", s.bracket.undecided.clone())?;
    let classes: Vec<(f64, String)> = s.classes.iter().map(|(p, c)| (*p, c.to_string())).collect();
    d.set_item("classes", classes)?;
    let rows: Vec<(f64, usize, f64)> = s.rows.iter().map(|r| (r.param, r.depth, r.value.ln)).collect();
    d.set_item("rows", rows)?;
    Ok(d.unbind())
}

fn source<'a>(tree: &'a Bound<'_, PyAny>) -> PyResult<&'a dyn CutSource> {
    if let Ok(t) = tree.cast::<PyTree>() {
        Ok(&t.get().inner)
    } else if let Ok(d) = tree.cast::<PyDegreeSequence>() {
        Ok(&d.get().inner)
    } else {
        Err(PyValueError::new_err("expected a Tree or a DegreeSequence"))
    }
}

/// IBN sweep: bracket, per-λ classes and `(λ, depth, ln min-cut)` rows.
#[pyfunction]
fn ibn_estimate(py: Python<'_>, tree: &Bound<'_, PyAny>, lambdas: Vec<f64>, depths: Vec<usize>) -> PyResult<Py<PyDict>> {
    let sched = DepthSchedule::with_depths(depths).map_err(err)?;
    let t = source(tree)?;
    let sweep = py.detach(|| flow_cut::ibn_estimate(t, &sched, &lambdas)).map_err(err)?;
    sweep_dict(py, &sweep)
}

/// Growth index estimate at depth `n`.
#[pyfunction]
fn igr_estimate(tree: &Bound<'_, PyAny>, n: usize, lambdas: Vec<f64>) -> PyResult<f64> {
    flow_cut::igr_estimate(source(tree)?, n, &lambdas).map(|g| g.estimate).map_err(err)
}

/// Recurrence/transience sweep over `gammas` for one sample of heavy-tailed conductances.
#[pyfunction]
fn rt_estimate(py: Python<'_>, tree: &PyTree, lam: f64, gammas: Vec<f64>, depths: Vec<usize>, seed: u64) -> PyResult<Py<PyDict>> {
    let sched = DepthSchedule::with_depths(depths).map_err(err)?;
    let t = &tree.inner;
    let sweep = py
        .detach(|| {
            let c = walks::sample_conductances(t, lam, seed)?;
            let psi = walks::psi_field(t, &c, sched.max_depth())?;
            walks::rt_estimate(t, &psi.profile(), &gammas, &sched)
        })
        .map_err(err)?;
    sweep_dict(py, &sweep)
}

/// `(n, #B(n), #E_n)` for the matrix semigroup ball of radius `depth`.
#[pyfunction]
#[pyo3(signature = (depth, memory_cap = DEFAULT_MEMORY_CAP))]
fn nathanson_growth(py: Python<'_>, depth: usize, memory_cap: usize) -> PyResult<Vec<(usize, usize, usize)>> {
    let ball = py.detach(|| nathanson::bfs_ball(depth, memory_cap)).map_err(err)?;
    Ok(ball.stats().iter().map(|r| (r.n, r.ball, r.level)).collect())
}

/// Lexicographic spanning tree of the semigroup ball.
#[pyfunction]
#[pyo3(signature = (depth, memory_cap = DEFAULT_MEMORY_CAP))]
fn nathanson_tree(depth: usize, memory_cap: usize) -> PyResult<PyTree> {
    let ball = nathanson::bfs_ball(depth, memory_cap).map_err(err)?;
    ball.lex_tree().map(|inner| PyTree { inner }).map_err(err)
}

fn word(s: &str) -> PyResult<Word> {
    s.parse().map_err(err)
}

#[pyfunction]
fn is_trivial(w: &str) -> PyResult<bool> {
    Ok(grigorchuk::is_trivial(&word(w)?))
}

#[pyfunction]
fn orbit_sizes(w: &str) -> PyResult<Vec<usize>> {
    grigorchuk::orbit_sizes(&word(w)?).map_err(err)
}

#[pyfunction]
fn loop_erase(w: &str) -> PyResult<String> {
    grigorchuk::loop_erase(&word(w)?).map(|q| q.to_string()).map_err(err)
}

/// Best word of length `n` found by search, with its orbit size.
#[pyfunction]
#[pyo3(signature = (n, beam = 256, seed = 0))]
fn search_word(py: Python<'_>, n: usize, beam: usize, seed: u64) -> PyResult<(String, usize)> {
    let r = py.detach(|| grigorchuk::search_word(n, beam, seed)).map_err(err)?;
    Ok((r.word.to_string(), r.orbit))
}

/// Depth marks of the branch-mark tree of a word.
#[pyfunction]
fn branch_marks(w: &str) -> PyResult<Vec<bool>> {
    Ok(grigorchuk::BranchMarks::from_word(&word(w)?).map_err(err)?.depth_marks())
}

#[pyfunction]
fn orbit_exponent() -> f64 {
    grigorchuk::orbit_exponent()
}

#[pyfunction]
fn growth_root() -> f64 {
    grigorchuk::growth_root()
}

/// Runs a JSON experiment config and returns the run summary as JSON text.
#[pyfunction]
fn run_config(py: Python<'_>, config: &str) -> PyResult<String> {
    let cfg = ExperimentConfig::from_json(config).map_err(err)?;
    let out = py.detach(|| experiment::run(&cfg)).map_err(err)?;
    Ok(out.summary.to_string())
}

#[pymodule]
fn pyibn(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", experiment::VERSION)?;
    m.add_class::<PyTree>()?;
    m.add_class::<PyDegreeSequence>()?;
    m.add_function(wrap_pyfunction!(ibn_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(igr_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(rt_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(nathanson_growth, m)?)?;
    m.add_function(wrap_pyfunction!(nathanson_tree, m)?)?;
    m.add_function(wrap_pyfunction!(is_trivial, m)?)?;
    m.add_function(wrap_pyfunction!(orbit_sizes, m)?)?;
    m.add_function(wrap_pyfunction!(loop_erase, m)?)?;
    m.add_function(wrap_pyfunction!(search_word, m)?)?;
    m.add_function(wrap_pyfunction!(branch_marks, m)?)?;
    m.add_function(wrap_pyfunction!(orbit_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(growth_root, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    Ok(())
}
