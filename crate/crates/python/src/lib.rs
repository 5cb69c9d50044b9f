//! Python bindings: problems, the solver, polling sets, audits and benchmarks.

use std::path::PathBuf;

use dspoll_core::audit::{estimate_lambda_dirs, AuditConfig};
use dspoll_core::bench::results::{read_profile_input, write_profiles, write_results};
use dspoll_core::bench::{load_corpus, load_problem, parse_problem, run_benchmark};
use dspoll_core::polling::{strategy_pss, Strategy};
use dspoll_core::polyhedron::{Constraint, Polyhedron as CorePolyhedron};
use dspoll_core::solver::{criticality_pi, direct_search, ProblemInstance, SolverConfig};
use dspoll_core::Error;
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        Error::NoConvergence { .. } | Error::NumericalBreakdown(_) | Error::ObjectiveEvaluationFailure { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn strategy(s: &str) -> PyResult<Strategy> {
    s.parse().map_err(to_py)
}

/// Feasible set `{x : a_i^T x <= b_i}`.
#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
struct Polyhedron {
    inner: CorePolyhedron,
}

#[pymethods]
impl Polyhedron {
    /// `rows` is a list of `(a, b)` pairs.
    #[new]
    fn new(n: usize, rows: Vec<(Vec<f64>, f64)>) -> PyResult<Self> {
        let rows = rows.into_iter().map(|(a, b)| Constraint::new(a, b)).collect();
        Ok(Self {
            inner: CorePolyhedron::new(n, rows).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn from_bounds(lower: Vec<f64>, upper: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: CorePolyhedron::from_bounds(&lower, &upper).map_err(to_py)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.dim()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn is_feasible(&self, x: Vec<f64>) -> PyResult<bool> {
        self.inner.is_feasible(&x).map_err(to_py)
    }

    fn project(&self, z: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.project(&z).map_err(to_py)
    }
}

/// A problem loaded from a JSON file or string.
#[pyclass(frozen)]
struct Problem {
    inner: ProblemInstance,
}

#[pymethods]
impl Problem {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: load_problem(&path).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: parse_problem(text, "<string>").map_err(to_py)?,
        })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.dim()
    }

    /// Start point, projected onto the feasible set.
    #[getter]
    fn x0(&self) -> Vec<f64> {
        self.inner.x0.clone()
    }

    #[getter]
    fn tags(&self) -> Vec<String> {
        self.inner.tags.clone()
    }

    #[getter]
    fn f_ref(&self) -> Option<f64> {
        self.inner.f_ref
    }

    #[getter]
    fn x_ref(&self) -> Option<Vec<f64>> {
        self.inner.x_ref.clone()
    }

    #[getter]
    fn omega(&self) -> Polyhedron {
        Polyhedron {
            inner: self.inner.omega.clone(),
        }
    }

    fn evaluate(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.eval(&x).map_err(PyRuntimeError::new_err)
    }

    fn gradient(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        let g = self
            .inner
            .gradient
            .as_ref()
            .ok_or_else(|| PyValueError::new_err("problem has no gradient"))?;
        Ok(g(&x))
    }

    /// Criticality measure at `x`.
    fn criticality(&self, x: Vec<f64>) -> PyResult<f64> {
        let g = self.gradient(x.clone())?;
        Ok(criticality_pi(&x, &g, &self.inner.omega, 1e-10).map_err(to_py)?.value)
    }
}

#[pyclass(frozen, get_all)]
struct Iteration {
    k: usize,
    x: Vec<f64>,
    f: f64,
    alpha: f64,
    success: bool,
    provenance: Option<String>,
    case: String,
    evals: usize,
}

#[pyclass(frozen, get_all)]
struct SolveResult {
    x: Vec<f64>,
    f: f64,
    f0: f64,
    evals: usize,
    termination: String,
    strategy: String,
    best_history: Vec<f64>,
    iterations: Vec<Py<Iteration>>,
}

#[pymethods]
impl SolveResult {
    fn __repr__(&self) -> String {
        format!(
            "SolveResult(f={:.17e}, evals={}, termination={})",
            self.f, self.evals, self.termination
        )
    }
}

#[pyfunction]
#[pyo3(signature = (problem, strategy="full", alpha0=None, budget_mult=200))]
fn solve(py: Python<'_>, problem: &Problem, strategy: &str, alpha0: Option<f64>, budget_mult: usize) -> PyResult<SolveResult> {
    let cfg = SolverConfig {
        strategy: self::strategy(strategy)?,
        alpha0,
        budget_multiplier: budget_mult,
        ..SolverConfig::default()
    };
    let run = py.detach(|| direct_search(&problem.inner, &cfg)).map_err(to_py)?;
    let iterations = run
        .iterates
        .iter()
        .map(|r| {
            Py::new(
                py,
                Iteration {
                    k: r.k,
                    x: r.x.clone(),
                    f: r.f,
                    alpha: r.alpha,
                    success: r.success,
                    provenance: r.provenance.map(|p| p.as_str().to_string()),
                    case: r.case.as_str().to_string(),
                    evals: r.evals,
                },
            )
        })
        .collect::<PyResult<Vec<_>>>()?;
    Ok(SolveResult {
        f: run.best_f(),
        x: run.x_final,
        f0: run.f0,
        evals: run.eval_count,
        termination: run.termination.as_str().to_string(),
        strategy: run.strategy.as_str().to_string(),
        best_history: run.best_history,
        iterations,
    })
}

#[pyclass(frozen, get_all)]
struct PollingSet {
    directions: Vec<Vec<f64>>,
    provenances: Vec<String>,
    case: String,
    certified_lambda: Option<f64>,
}

#[pyfunction]
#[pyo3(signature = (omega, x, alpha, strategy="full"))]
fn polling_set(omega: &Polyhedron, x: Vec<f64>, alpha: f64, strategy: &str) -> PyResult<PollingSet> {
    let set = strategy_pss(&x, alpha, &omega.inner, self::strategy(strategy)?).map_err(to_py)?;
    Ok(PollingSet {
        provenances: set.directions.iter().map(|d| d.provenance.as_str().to_string()).collect(),
        directions: set.vectors(),
        case: set.construction_case.as_str().to_string(),
        certified_lambda: set.certified_lambda,
    })
}

/// Lower estimate of Lambda for `directions` on `B(x, alpha) ∩ omega`.
#[pyfunction]
#[pyo3(signature = (directions, x, alpha, omega=None, quick=false))]
fn estimate_lambda(
    py: Python<'_>,
    directions: Vec<Vec<f64>>,
    x: Vec<f64>,
    alpha: f64,
    omega: Option<&Polyhedron>,
    quick: bool,
) -> PyResult<f64> {
    let omega = omega
        .map(|o| o.inner.clone())
        .unwrap_or_else(|| CorePolyhedron::unconstrained(x.len()));
    let cfg = if quick { AuditConfig::quick() } else { AuditConfig::default() };
    let est = py
        .detach(|| estimate_lambda_dirs(&directions, &x, alpha, &omega, &cfg))
        .map_err(to_py)?;
    Ok(est.lambda)
}

/// Runs all variants on a corpus directory and writes a results directory.
/// Returns `(problems, runs, failed runs)`.
#[pyfunction]
#[pyo3(name = "bench", signature = (corpus, out, variants=None))]
fn run_bench(py: Python<'_>, corpus: PathBuf, out: PathBuf, variants: Option<Vec<String>>) -> PyResult<(usize, usize, usize)> {
    let variants = match variants {
        Some(v) => v.iter().map(|s| strategy(s)).collect::<PyResult<Vec<_>>>()?,
        None => Strategy::ALL.to_vec(),
    };
    py.detach(|| {
        let problems = load_corpus(&corpus)?;
        let res = run_benchmark(&problems, &variants, &SolverConfig::default())?;
        write_results(&out, &res)?;
        let failed = res.runs.iter().filter(|r| r.result.is_err()).count();
        Ok((res.problems.len(), res.runs.len(), failed))
    })
    .map_err(to_py)
}

/// Writes profile files for a results directory; returns the written paths.
#[pyfunction]
#[pyo3(signature = (results, out, taus=vec![1e-3, 1e-6], split_by_tag=false))]
fn profiles(results: PathBuf, out: PathBuf, taus: Vec<f64>, split_by_tag: bool) -> PyResult<Vec<String>> {
    let input = read_profile_input(&results).map_err(to_py)?;
    let files = write_profiles(&input, &out, &taus, split_by_tag).map_err(to_py)?;
    Ok(files.iter().map(|p| p.display().to_string()).collect())
}

#[pymodule]
fn dspoll(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Polyhedron>()?;
    m.add_class::<Problem>()?;
    m.add_class::<Iteration>()?;
    m.add_class::<SolveResult>()?;
    m.add_class::<PollingSet>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(polling_set, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_lambda, m)?)?;
    m.add_function(wrap_pyfunction!(run_bench, m)?)?;
    m.add_function(wrap_pyfunction!(profiles, m)?)?;
    Ok(())
}
