//! Reward / punish update of the knowledge matrix.
//!
//! After an answer, the selected cell keeps a fraction
//! `clamp(1 - lambda * beta, 0, 1)` of its mass and the removed mass is
//! split equally among its neighbours: right and down on a correct answer,
//! left and up on a wrong one. `beta` grows quadratically with the gap
//! between the cell's required skill and the current skill estimate, so
//! surprising answers move more mass.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{KnowledgeMatrix, TaskCell, NUM_LEVELS, NUM_TOPICS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttemptOutcome {
    Correct,
    Wrong,
}

impl AttemptOutcome {
    #[inline]
    pub fn is_correct(self) -> bool {
        matches!(self, AttemptOutcome::Correct)
    }
}

impl From<bool> for AttemptOutcome {
    fn from(correct: bool) -> Self {
        if correct {
            AttemptOutcome::Correct
        } else {
            AttemptOutcome::Wrong
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    lambda: f64,
    neighbor_span: usize,
}

impl PolicyParams {
    pub const DEFAULT_LAMBDA: f64 = 0.5;

    pub fn new(lambda: f64, neighbor_span: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::invalid("lambda", lambda, "must lie in [0, 1]"));
        }
        if neighbor_span == 0 {
            return Err(Error::invalid(
                "neighbor_span",
                neighbor_span,
                "must be at least 1",
            ));
        }
        Ok(Self {
            lambda,
            neighbor_span,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn neighbor_span(&self) -> usize {
        self.neighbor_span
    }
}

impl Default for PolicyParams {
    fn default() -> Self {
        Self {
            lambda: Self::DEFAULT_LAMBDA,
            neighbor_span: 1,
        }
    }
}

/// Surprise factor `(task_skill - user_skill)^2 + 0.5`.
#[inline]
pub fn beta(task_skill: f64, user_skill: f64) -> f64 {
    let x = task_skill - user_skill;
    x * x + 0.5
}

/// In-bounds neighbours that receive mass, horizontal ones first.
fn targets(
    cell: TaskCell,
    outcome: AttemptOutcome,
    span: usize,
) -> impl Iterator<Item = TaskCell> + Clone {
    let (topic, level) = (cell.topic(), cell.level());
    let (horizontal, vertical) = match outcome {
        AttemptOutcome::Correct => (
            (level + 1..NUM_LEVELS.min(level + 1 + span))
                .map(move |l| (topic, l))
                .collect::<ArrayRange>(),
            (topic + 1..NUM_TOPICS.min(topic + 1 + span))
                .map(move |t| (t, level))
                .collect::<ArrayRange>(),
        ),
        AttemptOutcome::Wrong => (
            (level.saturating_sub(span)..level)
                .rev()
                .map(move |l| (topic, l))
                .collect::<ArrayRange>(),
            (topic.saturating_sub(span)..topic)
                .rev()
                .map(move |t| (t, level))
                .collect::<ArrayRange>(),
        ),
    };
    horizontal
        .into_iter()
        .chain(vertical)
        .map(|(t, l)| TaskCell::from_index(t * NUM_LEVELS + l))
}

/// Fixed-capacity list of grid coordinates along one axis.
#[derive(Clone, Copy)]
struct ArrayRange {
    items: [(usize, usize); NUM_LEVELS],
    len: usize,
}

impl FromIterator<(usize, usize)> for ArrayRange {
    fn from_iter<I: IntoIterator<Item = (usize, usize)>>(iter: I) -> Self {
        let mut out = ArrayRange {
            items: [(0, 0); NUM_LEVELS],
            len: 0,
        };
        for item in iter {
            out.items[out.len] = item;
            out.len += 1;
        }
        out
    }
}

impl IntoIterator for ArrayRange {
    type Item = (usize, usize);
    type IntoIter = std::iter::Take<std::array::IntoIter<(usize, usize), NUM_LEVELS>>;

    fn into_iter(self) -> Self::IntoIter {
        self.items.into_iter().take(self.len)
    }
}

/// Cells that receive mass when `cell` is answered with `outcome`.
///
/// Up to `span` cells per axis, nearest first; cells past the grid edge
/// are dropped, so the list is empty at the origin on a wrong answer and
/// at the hardest cell on a correct one.
pub fn update_targets(cell: TaskCell, outcome: AttemptOutcome, span: usize) -> Vec<TaskCell> {
    targets(cell, outcome, span).collect()
}

impl KnowledgeMatrix {
    /// Applies one reward or punish step in place.
    pub fn apply_update(
        &mut self,
        cell: TaskCell,
        outcome: AttemptOutcome,
        params: &PolicyParams,
    ) -> Result<()> {
        let user_skill = self.user_skill()?;
        let b = beta(cell.skill(), user_skill);
        self.apply_update_with_beta(cell, outcome, params.lambda, b, params.neighbor_span);
        Ok(())
    }

    /// Update step with an explicit `beta`, skipping the skill estimate.
    pub fn apply_update_with_beta(
        &mut self,
        cell: TaskCell,
        outcome: AttemptOutcome,
        lambda: f64,
        beta: f64,
        span: usize,
    ) {
        let old = self.get(cell);
        if old == 0.0 {
            return;
        }
        let receivers = targets(cell, outcome, span);
        let count = receivers.clone().count();
        if count == 0 {
            return;
        }
        let keep = (1.0 - lambda * beta).clamp(0.0, 1.0);
        let new = old * keep;
        let diff = (old - new) / count as f64;
        self.set(cell, new);
        for target in receivers {
            let p = self.get(target);
            self.set(target, p + diff);
        }
    }
}

/// Pure form of [`KnowledgeMatrix::apply_update`].
pub fn apply_update(
    m: &KnowledgeMatrix,
    cell: TaskCell,
    outcome: AttemptOutcome,
    params: &PolicyParams,
) -> Result<KnowledgeMatrix> {
    let mut next = m.clone();
    next.apply_update(cell, outcome, params)?;
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use AttemptOutcome::{Correct, Wrong};

    fn cell(topic: usize, level: usize) -> TaskCell {
        TaskCell::new(topic, level).unwrap()
    }

    #[test]
    fn beta_paraboloid() {
        assert_eq!(beta(0.5, 0.5), 0.5);
        assert_eq!(beta(1.5, 0.5), 1.5);
        assert_eq!(beta(0.5, 2.5), 4.5);
        assert_eq!(beta(2.5, 0.5), 4.5);
    }

    #[test]
    fn targets_reward_right_and_down() {
        assert_eq!(
            update_targets(cell(3, 4), Correct, 1),
            vec![cell(3, 5), cell(4, 4)]
        );
        assert_eq!(
            update_targets(cell(3, 4), Wrong, 1),
            vec![cell(3, 3), cell(2, 4)]
        );
    }

    #[test]
    fn targets_dropped_at_corners() {
        assert!(update_targets(cell(0, 0), Wrong, 1).is_empty());
        assert!(update_targets(cell(7, 9), Correct, 1).is_empty());
        assert_eq!(update_targets(cell(7, 3), Correct, 1), vec![cell(7, 4)]);
        assert_eq!(update_targets(cell(0, 3), Wrong, 1), vec![cell(0, 2)]);
    }

    #[test]
    fn wider_span_clips_at_edges() {
        assert_eq!(
            update_targets(cell(5, 8), Correct, 3),
            vec![cell(5, 9), cell(6, 8), cell(7, 8)]
        );
        assert_eq!(
            update_targets(cell(1, 2), Wrong, 2),
            vec![cell(1, 1), cell(1, 0), cell(0, 2)]
        );
        assert_eq!(update_targets(cell(0, 0), Correct, 20).len(), 9 + 7);
    }

    #[test]
    fn worked_update_halves_the_cell() {
        let mut m = KnowledgeMatrix::from_masses(&[(cell(3, 4), 0.4), (cell(0, 0), 0.6)]).unwrap();
        m.apply_update_with_beta(cell(3, 4), Correct, 1.0, 0.5, 1);
        assert_eq!(m.get(cell(3, 4)), 0.2);
        assert_eq!(m.get(cell(3, 5)), 0.1);
        assert_eq!(m.get(cell(4, 4)), 0.1);
    }

    #[test]
    fn worked_update_through_skill_estimate() {
        // both occupied cells need skill 2.0, so beta is at its minimum 0.5
        let m = KnowledgeMatrix::from_masses(&[(cell(3, 4), 0.4), (cell(1, 9), 0.6)]).unwrap();
        assert_eq!(beta(cell(3, 4).skill(), m.user_skill().unwrap()), 0.5);
        let next =
            apply_update(&m, cell(3, 4), Correct, &PolicyParams::new(1.0, 1).unwrap()).unwrap();
        assert_eq!(next.get(cell(3, 4)), 0.2);
        assert_eq!(next.get(cell(3, 5)), 0.1);
        assert_eq!(next.get(cell(4, 4)), 0.1);
        assert_eq!(next.get(cell(1, 9)), 0.6);
    }

    #[test]
    fn zero_lambda_is_a_no_op() {
        let m = KnowledgeMatrix::from_masses(&[(cell(2, 2), 0.5), (cell(2, 3), 0.5)]).unwrap();
        let params = PolicyParams::new(0.0, 1).unwrap();
        for outcome in [Correct, Wrong] {
            assert_eq!(apply_update(&m, cell(2, 2), outcome, &params).unwrap(), m);
        }
    }

    #[test]
    fn large_surprise_empties_the_cell() {
        // skill gap of 2 gives beta 4.5, lambda * beta > 1 clamps to a full shift
        let mut m = KnowledgeMatrix::from_masses(&[(cell(1, 4), 0.3), (cell(0, 0), 0.7)]).unwrap();
        m.apply_update_with_beta(cell(1, 4), Wrong, 1.0, 4.5, 1);
        assert_eq!(m.get(cell(1, 4)), 0.0);
        assert_eq!(m.get(cell(1, 3)), 0.15);
        assert_eq!(m.get(cell(0, 4)), 0.15);
        let total: f64 = m.as_slice().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn corner_updates_leave_matrix_unchanged() {
        let m = KnowledgeMatrix::new();
        let params = PolicyParams::new(1.0, 1).unwrap();
        assert_eq!(
            apply_update(&m, TaskCell::ORIGIN, Wrong, &params).unwrap(),
            m
        );

        let end = KnowledgeMatrix::from_masses(&[(cell(7, 9), 1.0)]).unwrap();
        assert_eq!(
            apply_update(&end, cell(7, 9), Correct, &params).unwrap(),
            end
        );
    }

    #[test]
    fn empty_cell_update_is_a_no_op() {
        let m = KnowledgeMatrix::new();
        let next =
            apply_update(&m, cell(4, 4), Correct, &PolicyParams::new(1.0, 1).unwrap()).unwrap();
        assert_eq!(next, m);
    }

    #[test]
    fn degenerate_matrix_is_rejected() {
        let mut m = KnowledgeMatrix::from_rows_unchecked([[0.0; NUM_LEVELS]; NUM_TOPICS]);
        let err = m.apply_update(TaskCell::ORIGIN, Correct, &PolicyParams::default());
        assert!(matches!(err, Err(Error::DegenerateMass { .. })));
    }

    #[test]
    fn params_validation() {
        assert!(PolicyParams::new(1.5, 1).is_err());
        assert!(PolicyParams::new(-0.1, 1).is_err());
        assert!(PolicyParams::new(0.5, 0).is_err());
        assert!(PolicyParams::new(f64::NAN, 1).is_err());
        assert_eq!(PolicyParams::default().lambda(), 0.5);
    }
}
