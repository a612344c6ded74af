//! Python bindings for the skill-based task selector.
//!
//! Cells are passed as `(topic, level)` tuples with zero-based indices.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use sbts_core::cli::{write_curves_csv, ConfigValues, ModelKind};
use sbts_core::matrix::{NUM_LEVELS, NUM_TOPICS};
use sbts_core::rng::{seeded, SimRng};
use sbts_core::{
    AttemptOutcome, DecayParams, MetricsAggregate, PolicyParams, StudentModel, TaskCell,
};

fn value_err(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn cell(topic: usize, level: usize) -> PyResult<TaskCell> {
    TaskCell::new(topic, level).map_err(value_err)
}

fn outcome(correct: bool) -> AttemptOutcome {
    AttemptOutcome::from(correct)
}

#[pyclass(name = "KnowledgeMatrix", module = "sbts", skip_from_py_object)]
struct PyKnowledgeMatrix {
    inner: sbts_core::KnowledgeMatrix,
}

#[pymethods]
impl PyKnowledgeMatrix {
    /// Fresh matrix with all mass on (0, 0).
    #[new]
    fn new() -> Self {
        Self {
            inner: sbts_core::KnowledgeMatrix::new(),
        }
    }

    /// Builds a matrix from 8 rows of 10 probabilities summing to 1.
    #[staticmethod]
    fn from_rows(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        if rows.len() != NUM_TOPICS || rows.iter().any(|r| r.len() != NUM_LEVELS) {
            return Err(PyValueError::new_err("expected 8 rows of 10 values"));
        }
        let mut grid = [[0.0; NUM_LEVELS]; NUM_TOPICS];
        for (dst, src) in grid.iter_mut().zip(&rows) {
            dst.copy_from_slice(src);
        }
        Ok(Self {
            inner: sbts_core::KnowledgeMatrix::from_rows(grid).map_err(value_err)?,
        })
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        self.inner.rows().iter().map(|r| r.to_vec()).collect()
    }

    fn get(&self, topic: usize, level: usize) -> PyResult<f64> {
        Ok(self.inner.get(cell(topic, level)?))
    }

    fn total_mass(&self) -> f64 {
        self.inner.total_mass()
    }

    fn user_skill(&self) -> PyResult<f64> {
        self.inner.user_skill().map_err(value_err)
    }

    fn expected_level(&self) -> PyResult<f64> {
        self.inner.expected_level().map_err(value_err)
    }

    /// Applies one reward (correct) or punish (wrong) step in place.
    #[pyo3(signature = (topic, level, correct, lam = PolicyParams::DEFAULT_LAMBDA, span = 1))]
    fn apply_update(
        &mut self,
        topic: usize,
        level: usize,
        correct: bool,
        lam: f64,
        span: usize,
    ) -> PyResult<()> {
        let params = PolicyParams::new(lam, span).map_err(value_err)?;
        self.inner
            .apply_update(cell(topic, level)?, outcome(correct), &params)
            .map_err(value_err)
    }

    /// Draws a task-set of ten `(topic, level)` cells.
    #[pyo3(signature = (seed, decay = DecayParams::DEFAULT_FACTOR))]
    fn generate_taskset(&self, seed: u64, decay: f64) -> PyResult<Vec<(usize, usize)>> {
        let decay = DecayParams::new(decay).map_err(value_err)?;
        let set = sbts_core::generate_taskset(&self.inner, &decay, &mut seeded(seed))
            .map_err(value_err)?;
        Ok(set.iter().map(|c| (c.topic(), c.level())).collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "KnowledgeMatrix(expected_level={:.4})",
            self.inner.expected_level().unwrap_or(f64::NAN)
        )
    }
}

/// A simulated student with its own random stream.
#[pyclass(name = "Student", module = "sbts", skip_from_py_object)]
struct PyStudent {
    model: StudentModel,
    rng: SimRng,
}

#[pymethods]
impl PyStudent {
    #[staticmethod]
    #[pyo3(signature = (p, seed = 0))]
    fn static_model(p: f64, seed: u64) -> PyResult<Self> {
        Ok(Self {
            model: StudentModel::static_model(p).map_err(value_err)?,
            rng: seeded(seed),
        })
    }

    #[staticmethod]
    #[pyo3(signature = (p_explore, epsilon = 0.3, seed = 0))]
    fn static_epsilon(p_explore: f64, epsilon: f64, seed: u64) -> PyResult<Self> {
        Ok(Self {
            model: StudentModel::static_epsilon(epsilon, p_explore).map_err(value_err)?,
            rng: seeded(seed),
        })
    }

    #[staticmethod]
    #[pyo3(signature = (epsilon0 = 0.7, cutoff = 100, p_explore = 0.5, seed = 0))]
    fn dynamic_epsilon(epsilon0: f64, cutoff: u32, p_explore: f64, seed: u64) -> PyResult<Self> {
        Ok(Self {
            model: StudentModel::dynamic_epsilon(epsilon0, cutoff, p_explore).map_err(value_err)?,
            rng: seeded(seed),
        })
    }

    fn epsilon_at(&self, t: u32) -> f64 {
        self.model.epsilon_at(t)
    }

    /// Answers a task; returns True when correct.
    fn attempt(&mut self, topic: usize, level: usize, t: u32) -> PyResult<bool> {
        Ok(self
            .model
            .attempt(cell(topic, level)?, t, &mut self.rng)
            .is_correct())
    }

    /// Per-topic knowledge, or None for the static model.
    fn knowledge(&self) -> Option<Vec<f64>> {
        self.model.knowledge().map(|k| k.per_topic().to_vec())
    }
}

#[pyclass(name = "CohortResult", module = "sbts", skip_from_py_object)]
struct PyCohortResult {
    inner: MetricsAggregate,
}

#[pymethods]
impl PyCohortResult {
    #[getter]
    fn expected_level_mean(&self) -> f64 {
        self.inner.final_expected_level.mean
    }

    #[getter]
    fn expected_level_std(&self) -> f64 {
        self.inner.final_expected_level.std
    }

    #[getter]
    fn attempts(&self) -> u64 {
        self.inner.attempts
    }

    #[getter]
    fn successes(&self) -> u64 {
        self.inner.successes
    }

    /// `{level: [(task_index, mean_success_rate, sample_count), ...]}` for levels 1..=10.
    fn curves(&self) -> std::collections::BTreeMap<u8, Vec<(u32, f64, u64)>> {
        self.inner
            .level_curves
            .iter()
            .map(|c| {
                let points = c
                    .points
                    .iter()
                    .map(|p| (p.task_index, p.mean_success_rate, p.sample_count))
                    .collect();
                (c.level, points)
            })
            .collect()
    }

    /// `[(level, runs, p5, p50, p95), ...]` first-attempt index percentiles.
    fn onsets(&self) -> Vec<(u8, u64, u32, u32, u32)> {
        self.inner
            .level_onsets
            .iter()
            .map(|o| (o.level, o.runs, o.p5, o.p50, o.p95))
            .collect()
    }

    fn write_curves_csv(&self, path: PathBuf) -> PyResult<()> {
        write_curves_csv(&self.inner, &path).map_err(|e| PyIOError::new_err(e.to_string()))
    }
}

/// Runs a seeded cohort. Keyword names mirror the CLI flags.
#[pyfunction]
#[pyo3(signature = (
    model, *, students = 100, tasksets = 50, iterations = 10, seed = 0, p = None, epsilon = None,
    epsilon0 = None, cutoff = None, p_explore = None, eta = None, lam = None, decay = None, span = None,
))]
#[allow(clippy::too_many_arguments)]
fn run_cohort(
    py: Python<'_>,
    model: &str,
    students: u32,
    tasksets: u32,
    iterations: u32,
    seed: u64,
    p: Option<f64>,
    epsilon: Option<f64>,
    epsilon0: Option<f64>,
    cutoff: Option<u32>,
    p_explore: Option<f64>,
    eta: Option<f64>,
    lam: Option<f64>,
    decay: Option<f64>,
    span: Option<usize>,
) -> PyResult<PyCohortResult> {
    let kind = match model {
        "static" => ModelKind::Static,
        "static-eps" => ModelKind::StaticEps,
        "dynamic" => ModelKind::Dynamic,
        other => return Err(PyValueError::new_err(format!("unknown model `{other}`"))),
    };
    let values = ConfigValues {
        students: Some(students),
        tasksets: Some(tasksets),
        iterations: Some(iterations),
        model: Some(kind),
        p,
        epsilon,
        epsilon0,
        cutoff,
        p_explore,
        eta,
        lambda: lam,
        decay,
        span,
        seed: Some(seed),
    };
    let config = values.resolve().map_err(value_err)?;
    let inner = py
        .detach(|| sbts_core::run_cohort(&config))
        .map_err(value_err)?;
    Ok(PyCohortResult { inner })
}

#[pyfunction]
fn cell_skill(topic: usize, level: usize) -> PyResult<f64> {
    Ok(sbts_core::cell_skill(cell(topic, level)?))
}

#[pyfunction]
fn beta(task_skill: f64, user_skill: f64) -> f64 {
    sbts_core::beta(task_skill, user_skill)
}

#[pyfunction]
#[pyo3(signature = (topic, level, correct, span = 1))]
fn update_targets(
    topic: usize,
    level: usize,
    correct: bool,
    span: usize,
) -> PyResult<Vec<(usize, usize)>> {
    Ok(
        sbts_core::update_targets(cell(topic, level)?, outcome(correct), span)
            .into_iter()
            .map(|c| (c.topic(), c.level()))
            .collect(),
    )
}

#[pymodule]
fn sbts(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyKnowledgeMatrix>()?;
    m.add_class::<PyStudent>()?;
    m.add_class::<PyCohortResult>()?;
    m.add_function(wrap_pyfunction!(run_cohort, m)?)?;
    m.add_function(wrap_pyfunction!(cell_skill, m)?)?;
    m.add_function(wrap_pyfunction!(beta, m)?)?;
    m.add_function(wrap_pyfunction!(update_targets, m)?)?;
    m.add("NUM_TOPICS", NUM_TOPICS)?;
    m.add("NUM_LEVELS", NUM_LEVELS)?;
    m.add("TOPICS", sbts_core::matrix::TOPIC_NAMES.to_vec())?;
    Ok(())
}
