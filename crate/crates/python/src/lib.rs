//! Python bindings: levels, the solver, metrics and the n-gram generator.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use sokoeval::corpus::Annotation;
use sokoeval::generator::{GenerationParams, NGramModel};
use sokoeval::metrics::{self, DistinctnessConfig, EvalConfig, Sample, Tolerances};
use sokoeval::{Level, SolverConfig, Transform};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_transform(name: &str) -> PyResult<Transform> {
    match name {
        "flip_x" => Ok(Transform::FlipX),
        "flip_y" => Ok(Transform::FlipY),
        "rot90_cw" => Ok(Transform::Rot90Cw),
        "rot90_ccw" => Ok(Transform::Rot90Ccw),
        other => Err(PyValueError::new_err(format!(
            "unknown transform {other:?}; expected flip_x, flip_y, rot90_cw or rot90_ccw"
        ))),
    }
}

#[pyclass(name = "Level", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
pub struct PyLevel {
    inner: Level,
}

#[pymethods]
impl PyLevel {
    /// Parses level text. With `pad`, short rows are right-padded with walls.
    #[staticmethod]
    #[pyo3(signature = (text, pad = false))]
    fn parse(text: &str, pad: bool) -> PyResult<PyLevel> {
        Level::parse(text, pad)
            .map(|inner| PyLevel { inner })
            .map_err(value_err)
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    fn serialize(&self) -> String {
        self.inner.serialize()
    }

    fn validate<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let r = self.inner.validate();
        let d = PyDict::new(py);
        d.set_item("rectangular", r.rectangular)?;
        d.set_item("chars_valid", r.chars_valid)?;
        d.set_item("player_count", r.player_count)?;
        d.set_item("box_count", r.box_count)?;
        d.set_item("goal_count", r.goal_count)?;
        d.set_item("verdict", r.verdict)?;
        Ok(d)
    }

    fn is_valid(&self) -> bool {
        self.inner.validate().verdict
    }

    fn empty_count(&self) -> usize {
        self.inner.empty_count()
    }

    fn prop_empty(&self) -> f64 {
        self.inner.prop_empty()
    }

    fn transform(&self, op: &str) -> PyResult<PyLevel> {
        Ok(PyLevel {
            inner: self.inner.transform(parse_transform(op)?),
        })
    }

    fn __str__(&self) -> String {
        self.inner.serialize()
    }

    fn __repr__(&self) -> String {
        format!("Level({}x{})", self.inner.width(), self.inner.height())
    }
}

#[pyclass(name = "SolveResult", frozen, get_all)]
pub struct PySolveResult {
    status: String,
    solution_len: Option<usize>,
    pushes: Option<usize>,
    nodes_expanded: u64,
    /// Moves as `U`/`D`/`L`/`R` characters.
    moves: Option<String>,
}

#[pymethods]
impl PySolveResult {
    fn is_solved(&self) -> bool {
        self.status == "solved"
    }

    fn __repr__(&self) -> String {
        format!(
            "SolveResult(status={:?}, solution_len={:?}, nodes_expanded={})",
            self.status, self.solution_len, self.nodes_expanded
        )
    }
}

#[pyfunction]
#[pyo3(signature = (level, budget = sokoeval::solver::DEFAULT_BUDGET, deadlock_pruning = true))]
fn solve(py: Python<'_>, level: &PyLevel, budget: u64, deadlock_pruning: bool) -> PySolveResult {
    let config = SolverConfig {
        budget: budget.max(1),
        deadlock_pruning,
    };
    let r = py.detach(|| sokoeval::solve(&level.inner, &config));
    PySolveResult {
        status: r.status.to_string(),
        solution_len: r.solution_len,
        pushes: r.pushes,
        nodes_expanded: r.nodes_expanded,
        moves: r.moves.map(|m| m.iter().map(|d| d.to_char()).collect()),
    }
}

#[pyfunction]
fn edit_distance(a: &str, b: &str) -> usize {
    metrics::edit_distance(a, b)
}

/// Returns `(novel, nearest_training_distance)`.
#[pyfunction]
#[pyo3(signature = (sample, training, k = metrics::DEFAULT_K))]
fn is_novel(sample: &str, training: Vec<String>, k: usize) -> (bool, Option<usize>) {
    metrics::is_novel(sample, &training, k)
}

/// Returns `(fraction, clique_size, iterations, capped)`.
#[pyfunction]
#[pyo3(signature = (samples, k = metrics::DEFAULT_K, clique_cap = metrics::DEFAULT_CLIQUE_CAP))]
fn diversity(
    py: Python<'_>,
    samples: Vec<String>,
    k: usize,
    clique_cap: u64,
) -> (f64, usize, u64, bool) {
    let config = DistinctnessConfig {
        k,
        clique_iteration_cap: clique_cap.max(1),
    };
    let r = py.detach(|| metrics::diversity(&samples, &config));
    (r.fraction, r.clique_size, r.iterations, r.capped)
}

#[pyclass(name = "MetricsReport", frozen, get_all)]
pub struct PyMetricsReport {
    n_samples: usize,
    novelty: f64,
    playability: f64,
    diversity: f64,
    accuracy: Option<f64>,
    score: f64,
    control_score: Option<f64>,
    clique_iterations_used: u64,
    clique_capped: bool,
    json: String,
}

#[pymethods]
impl PyMetricsReport {
    fn to_json(&self) -> String {
        self.json.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "MetricsReport(novelty={:.2}, playability={:.2}, diversity={:.2}, score={:.2})",
            self.novelty, self.playability, self.diversity, self.score
        )
    }
}

/// Evaluates samples against a training set. `prompts`, if given, holds one
/// `(prop_empty, solution_len)` pair per sample (either may be `None`).
#[pyfunction]
#[pyo3(signature = (
    samples,
    training,
    prompts = None,
    k = metrics::DEFAULT_K,
    budget = sokoeval::solver::DEFAULT_BUDGET,
    clique_cap = metrics::DEFAULT_CLIQUE_CAP,
    tol_empty = 0.01,
    tol_len = 5,
))]
#[allow(clippy::too_many_arguments)]
fn evaluate(
    py: Python<'_>,
    samples: Vec<String>,
    training: Vec<String>,
    prompts: Option<Vec<(Option<f64>, Option<usize>)>>,
    k: usize,
    budget: u64,
    clique_cap: u64,
    tol_empty: f64,
    tol_len: usize,
) -> PyResult<PyMetricsReport> {
    if let Some(p) = &prompts {
        if p.len() != samples.len() {
            return Err(PyValueError::new_err(
                "prompts must match samples in length",
            ));
        }
    }
    let samples: Vec<Sample> = samples
        .into_iter()
        .enumerate()
        .map(|(i, text)| Sample {
            text,
            prompt: prompts.as_ref().map(|p| Annotation {
                prop_empty: p[i].0,
                solution_len: p[i].1,
            }),
        })
        .collect();
    let config = EvalConfig {
        distinct: DistinctnessConfig {
            k,
            clique_iteration_cap: clique_cap.max(1),
        },
        solver: SolverConfig::with_budget(budget.max(1)),
        tolerances: Tolerances {
            prop_empty: tol_empty,
            solution_len: tol_len,
        },
    };
    let (_, r) = py.detach(|| metrics::evaluate(&samples, &training, &config, None));
    Ok(PyMetricsReport {
        json: serde_json::to_string(&r).map_err(value_err)?,
        n_samples: r.n_samples,
        novelty: r.novelty,
        playability: r.playability,
        diversity: r.diversity,
        accuracy: r.accuracy,
        score: r.score,
        control_score: r.control_score,
        clique_iterations_used: r.clique_iterations_used,
        clique_capped: r.clique_capped,
    })
}

#[pyclass(name = "NGramModel", frozen)]
pub struct PyNGramModel {
    inner: NGramModel,
}

#[pymethods]
impl PyNGramModel {
    #[staticmethod]
    #[pyo3(signature = (texts, order = 16))]
    fn train(texts: Vec<String>, order: usize) -> PyResult<PyNGramModel> {
        NGramModel::train(&texts, order)
            .map(|inner| PyNGramModel { inner })
            .map_err(value_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<PyNGramModel> {
        serde_json::from_str(text)
            .map(|inner| PyNGramModel { inner })
            .map_err(value_err)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(value_err)
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order
    }

    /// One completion per beam.
    #[pyo3(signature = (prompt = "", temperature = 1.0, top_p = 1.0, beams = 1, max_chars = 512, seed = 0))]
    fn generate(
        &self,
        prompt: &str,
        temperature: f64,
        top_p: f64,
        beams: usize,
        max_chars: usize,
        seed: u64,
    ) -> PyResult<Vec<String>> {
        let params = GenerationParams {
            temperature,
            top_p,
            beams,
            max_chars,
            seed,
        };
        self.inner.generate(prompt, &params).map_err(value_err)
    }
}

#[pymodule]
fn pysokoeval(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLevel>()?;
    m.add_class::<PySolveResult>()?;
    m.add_class::<PyMetricsReport>()?;
    m.add_class::<PyNGramModel>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(edit_distance, m)?)?;
    m.add_function(wrap_pyfunction!(is_novel, m)?)?;
    m.add_function(wrap_pyfunction!(diversity, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    Ok(())
}
