//! Python module `metadesign_py`: algorithm graphs, the solver and the
//! design loop.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use metadesign::catalog::{registry_json, Encoding};
use metadesign::designer::{design, DesignConfig};
use metadesign::evaluator::{EvalPlan, Method, Objective};
use metadesign::executor::{solve as run_solver, SolveConfig};
use metadesign::graph::{validate_graph, AlgorithmGraph};
use metadesign::presets;
use metadesign::problems::{build_instances, InstanceRole, ProblemConfig};
use metadesign::render::render_pseudocode;
use metadesign::serial::{deserialize, to_json};
use metadesign::space::build_default_space;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn problem(name: &str, dim: usize, elements: Vec<usize>) -> ProblemConfig {
    ProblemConfig { name: name.to_string(), dim, elements, ..Default::default() }
}

/// An algorithm graph.
#[pyclass(name = "Graph", module = "metadesign_py", from_py_object)]
#[derive(Clone)]
struct PyGraph {
    inner: AlgorithmGraph,
}

#[pymethods]
impl PyGraph {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        deserialize(text.as_bytes()).map(|inner| Self { inner }).map_err(value_err)
    }

    /// GA, ILS, SA or RS for an encoding.
    #[staticmethod]
    #[pyo3(signature = (name, encoding = "discrete"))]
    fn baseline(name: &str, encoding: &str) -> PyResult<Self> {
        let enc: Encoding = encoding.parse().map_err(value_err)?;
        presets::make_baseline(name, enc).map(|inner| Self { inner }).map_err(value_err)
    }

    #[staticmethod]
    fn ris_designed() -> Self {
        Self { inner: presets::ris_designed() }
    }

    #[staticmethod]
    fn stacking_designed() -> Self {
        Self { inner: presets::stacking_designed() }
    }

    fn to_json(&self) -> String {
        to_json(&self.inner)
    }

    fn pseudocode(&self) -> PyResult<String> {
        render_pseudocode(&self.inner).map_err(value_err)
    }

    /// Violations against the default design space; empty when valid.
    fn validate(&self) -> Vec<String> {
        let space = build_default_space(self.inner.encoding);
        validate_graph(&self.inner, &space).violations.iter().map(|v| v.to_string()).collect()
    }

    #[getter]
    fn encoding(&self) -> &'static str {
        self.inner.encoding.as_str()
    }

    #[getter]
    fn n_vertices(&self) -> usize {
        self.inner.vertices.len()
    }

    fn __repr__(&self) -> String {
        format!("Graph({}, {} vertices)", self.inner.encoding, self.inner.vertices.len())
    }
}

/// Runs `graph` on one seeded instance of a built-in problem.
#[pyfunction]
#[pyo3(signature = (graph, problem_name, dim = 20, elements = 32, seed = 0, pop_size = 50, max_fe = 5000, instance_seed = 0))]
#[allow(clippy::too_many_arguments)]
fn solve<'py>(
    py: Python<'py>,
    graph: &PyGraph,
    problem_name: &str,
    dim: usize,
    elements: usize,
    seed: u64,
    pop_size: usize,
    max_fe: usize,
    instance_seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let inst = build_instances(&problem(problem_name, dim, vec![elements]), InstanceRole::Test, 1, instance_seed)
        .map_err(value_err)?
        .remove(0);
    let cfg = SolveConfig { pop_size, max_fe, seed, record_every: None };
    let rec = run_solver(&graph.inner, inst.problem.as_ref(), &cfg).map_err(value_err)?;
    let out = PyDict::new(py);
    out.set_item("best", rec.final_best())?;
    out.set_item("evaluations", rec.evaluations)?;
    out.set_item("iterations", rec.iterations)?;
    out.set_item("trajectory", rec.trajectory.iter().map(|p| (p.fe, p.best)).collect::<Vec<_>>())?;
    Ok(out)
}

/// Designs an algorithm for a built-in problem and returns the best graph
/// with its training and test aggregates and the convergence curve.
#[pyfunction]
#[pyo3(signature = (problem_name, dim = 20, elements = vec![32], train = 3, test = 3, n_iterations = 10,
                    n_candidates = 4, method = "exhaustive", objective = "quality", reps = 1,
                    pop_size = 20, max_fe = 1000, seed = 0))]
#[allow(clippy::too_many_arguments)]
fn design_algorithm<'py>(
    py: Python<'py>,
    problem_name: &str,
    dim: usize,
    elements: Vec<usize>,
    train: usize,
    test: usize,
    n_iterations: usize,
    n_candidates: usize,
    method: &str,
    objective: &str,
    reps: usize,
    pop_size: usize,
    max_fe: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let pc = problem(problem_name, dim, elements);
    let train = build_instances(&pc, InstanceRole::Training, train, seed).map_err(value_err)?;
    let test = build_instances(&pc, InstanceRole::Test, test, seed).map_err(value_err)?;
    let encoding = train.first().ok_or_else(|| value_err("train must be at least 1"))?.problem.domain().encoding();
    let mut plan = EvalPlan::new(train, SolveConfig { pop_size, max_fe, seed: 0, record_every: None });
    plan.method = method.parse::<Method>().map_err(value_err)?;
    plan.objective = objective.parse::<Objective>().map_err(value_err)?;
    plan.reps = reps;
    let mut cfg = DesignConfig::new(build_default_space(encoding), plan);
    cfg.n_iterations = n_iterations;
    cfg.n_candidates = n_candidates;
    cfg.master_seed = seed;
    cfg.test_instances = test;
    let report = py.detach(|| design(&cfg)).map_err(value_err)?;
    let best = report.best();
    let out = PyDict::new(py);
    out.set_item("best", PyGraph { inner: best.graph.clone() })?;
    out.set_item("training", best.training.aggregate)?;
    out.set_item("test", best.test.as_ref().map(|t| t.aggregate))?;
    out.set_item("convergence", report.convergence.clone())?;
    out.set_item("runs", report.runs)?;
    Ok(out)
}

/// The component catalog as JSON.
#[pyfunction]
fn component_registry() -> String {
    registry_json()
}

#[pymodule]
fn metadesign_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(design_algorithm, m)?)?;
    m.add_function(wrap_pyfunction!(component_registry, m)?)?;
    Ok(())
}
