//! Task-set sampling.
//!
//! Cells are drawn categorically with probability proportional to
//! `matrix(cell) * weight(cell)`. Weights start at 1.0 for every set and
//! each draw multiplies the drawn cell's weight by the decay factor, which
//! makes repeats within one set less likely without touching the matrix.

use rand_core::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{KnowledgeMatrix, TaskCell, NUM_CELLS};
use crate::rng::unit_f64;

pub const TASKSET_LEN: usize = 10;

/// Per-cell multiplicative sampling weights for one task-set.
pub type CellWeights = [f64; NUM_CELLS];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayParams {
    factor: f64,
}

impl DecayParams {
    pub const DEFAULT_FACTOR: f64 = 0.5;

    pub fn new(factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor <= 1.0) {
            return Err(Error::invalid("decay factor", factor, "must lie in (0, 1]"));
        }
        Ok(Self { factor })
    }

    /// No decay: repeated draws of a cell stay equally likely.
    pub fn disabled() -> Self {
        Self { factor: 1.0 }
    }

    pub fn factor(&self) -> f64 {
        self.factor
    }
}

impl Default for DecayParams {
    fn default() -> Self {
        Self {
            factor: Self::DEFAULT_FACTOR,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSet {
    tasks: [TaskCell; TASKSET_LEN],
}

impl TaskSet {
    pub fn tasks(&self) -> &[TaskCell; TASKSET_LEN] {
        &self.tasks
    }

    pub fn iter(&self) -> impl Iterator<Item = TaskCell> + '_ {
        self.tasks.iter().copied()
    }
}

impl<'a> IntoIterator for &'a TaskSet {
    type Item = &'a TaskCell;
    type IntoIter = std::slice::Iter<'a, TaskCell>;

    fn into_iter(self) -> Self::IntoIter {
        self.tasks.iter()
    }
}

/// Draws one cell proportionally to `m(cell) * weights(cell)`.
///
/// Consumes exactly one uniform draw. The scan runs in row-major order and
/// picks the first cell whose cumulative weight exceeds `u * total`.
pub fn sample_cell<R: Rng + ?Sized>(
    m: &KnowledgeMatrix,
    weights: &CellWeights,
    rng: &mut R,
) -> Result<TaskCell> {
    let cells = m.as_slice();
    let total: f64 = cells.iter().zip(weights).map(|(p, w)| p * w).sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::EmptySupport);
    }
    let target = unit_f64(rng) * total;
    let mut acc = 0.0;
    let mut last_positive = None;
    for (i, (p, w)) in cells.iter().zip(weights).enumerate() {
        let eff = p * w;
        if eff > 0.0 {
            acc += eff;
            if acc > target {
                return Ok(TaskCell::from_index(i));
            }
            last_positive = Some(i);
        }
    }
    // rounding left the cumulative sum just short of the target
    last_positive
        .map(TaskCell::from_index)
        .ok_or(Error::EmptySupport)
}

/// Draws a set of ten tasks from `m` with per-set decay.
pub fn generate_taskset<R: Rng + ?Sized>(
    m: &KnowledgeMatrix,
    decay: &DecayParams,
    rng: &mut R,
) -> Result<TaskSet> {
    generate_taskset_with_weights(m, decay, rng).map(|(set, _)| set)
}

/// Like [`generate_taskset`], also returning the decayed weights left after the last draw.
pub fn generate_taskset_with_weights<R: Rng + ?Sized>(
    m: &KnowledgeMatrix,
    decay: &DecayParams,
    rng: &mut R,
) -> Result<(TaskSet, CellWeights)> {
    let mut weights = [1.0; NUM_CELLS];
    let mut tasks = [TaskCell::ORIGIN; TASKSET_LEN];
    for slot in tasks.iter_mut() {
        let cell = sample_cell(m, &weights, rng)?;
        weights[cell.index()] *= decay.factor;
        *slot = cell;
    }
    Ok((TaskSet { tasks }, weights))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{NUM_LEVELS, NUM_TOPICS};
    use crate::rng::seeded;

    fn cell(topic: usize, level: usize) -> TaskCell {
        TaskCell::new(topic, level).unwrap()
    }

    #[test]
    fn single_support_always_drawn() {
        let m = KnowledgeMatrix::new();
        let mut weights = [1.0; NUM_CELLS];
        weights[0] = 1e-6;
        let mut rng = seeded(5);
        for _ in 0..100 {
            assert_eq!(
                sample_cell(&m, &weights, &mut rng).unwrap(),
                TaskCell::ORIGIN
            );
        }
    }

    #[test]
    fn empty_support_is_an_error() {
        let m = KnowledgeMatrix::new();
        let mut weights = [1.0; NUM_CELLS];
        weights[0] = 0.0;
        let mut rng = seeded(5);
        assert!(matches!(
            sample_cell(&m, &weights, &mut rng),
            Err(Error::EmptySupport)
        ));
    }

    #[test]
    fn decay_disabled_repeats_the_sole_cell() {
        let m = KnowledgeMatrix::from_masses(&[(cell(2, 6), 1.0)]).unwrap();
        let set = generate_taskset(&m, &DecayParams::disabled(), &mut seeded(9)).unwrap();
        assert!(set.iter().all(|c| c == cell(2, 6)));
    }

    #[test]
    fn decay_leaves_sole_cell_and_matrix_untouched() {
        let m = KnowledgeMatrix::from_masses(&[(cell(2, 6), 1.0)]).unwrap();
        let before = m.clone();
        let (set, weights) =
            generate_taskset_with_weights(&m, &DecayParams::new(0.5).unwrap(), &mut seeded(9))
                .unwrap();
        assert_eq!(set.tasks().len(), TASKSET_LEN);
        assert!(set.iter().all(|c| c == cell(2, 6)));
        assert_eq!(weights[cell(2, 6).index()], 0.5f64.powi(10));
        assert_eq!(m, before);
    }

    #[test]
    fn seeded_generation_is_deterministic() {
        let uniform = KnowledgeMatrix::from_rows([[1.0 / 80.0; NUM_LEVELS]; NUM_TOPICS]).unwrap();
        let a = generate_taskset(&uniform, &DecayParams::default(), &mut seeded(77)).unwrap();
        let b = generate_taskset(&uniform, &DecayParams::default(), &mut seeded(77)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn decay_validation() {
        assert!(DecayParams::new(0.0).is_err());
        assert!(DecayParams::new(1.01).is_err());
        assert!(DecayParams::new(f64::NAN).is_err());
        assert!(DecayParams::new(1.0).is_ok());
    }
}
