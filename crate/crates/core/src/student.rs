//! Simulated students.
//!
//! Three answer generators:
//!
//! * `Static`: every task is answered correctly with a fixed probability.
//! * `StaticEpsilon`: epsilon-greedy with a constant exploration rate. On
//!   exploration the answer is a coin flip with `p_explore`; on
//!   exploitation the student passes iff its knowledge of the task's topic
//!   reaches `(level + 1) / 10`.
//! * `DynamicEpsilon`: as above, but epsilon starts at `epsilon0`, decays
//!   as `epsilon0 * exp(-5 t / cutoff)` and is zero from `cutoff` tasks on.
//!
//! Correct answers raise the topic's knowledge by `eta * (1 - k)`.

use rand_core::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{TaskCell, NUM_LEVELS, NUM_TOPICS};
use crate::policy::AttemptOutcome;
use crate::rng::unit_f64;

pub const DEFAULT_ETA: f64 = 0.1;
pub const DEFAULT_STATIC_EPSILON: f64 = 0.3;
pub const DEFAULT_EPSILON0: f64 = 0.7;
pub const DEFAULT_CUTOFF: u32 = 100;
pub const DEFAULT_DYNAMIC_P_EXPLORE: f64 = 0.5;

/// The student's actual per-topic knowledge, each value in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StudentKnowledge {
    per_topic: [f64; NUM_TOPICS],
}

impl StudentKnowledge {
    pub fn new(per_topic: [f64; NUM_TOPICS]) -> Result<Self> {
        if let Some(bad) = per_topic.iter().find(|k| !(0.0..=1.0).contains(*k)) {
            return Err(Error::invalid("topic knowledge", bad, "must lie in [0, 1]"));
        }
        Ok(Self { per_topic })
    }

    pub fn per_topic(&self) -> &[f64; NUM_TOPICS] {
        &self.per_topic
    }

    pub fn get(&self, topic: usize) -> f64 {
        self.per_topic[topic]
    }

    /// Whether the knowledge is enough to pass `cell` without guessing.
    pub fn passes(&self, cell: TaskCell) -> bool {
        self.per_topic[cell.topic()] >= pass_threshold(cell)
    }

    pub fn update(&mut self, cell: TaskCell, outcome: AttemptOutcome, eta: f64) {
        if outcome.is_correct() {
            let k = &mut self.per_topic[cell.topic()];
            *k += eta * (1.0 - *k);
        }
    }
}

/// Knowledge needed to pass `cell` on exploitation: `(level + 1) / 10`.
#[inline]
pub fn pass_threshold(cell: TaskCell) -> f64 {
    (cell.level() + 1) as f64 / NUM_LEVELS as f64
}

pub fn update_knowledge(
    k: &StudentKnowledge,
    cell: TaskCell,
    outcome: AttemptOutcome,
    eta: f64,
) -> StudentKnowledge {
    let mut next = *k;
    next.update(cell, outcome, eta);
    next
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum StudentModel {
    Static {
        p_success: f64,
    },
    #[serde(rename = "static-eps")]
    StaticEpsilon {
        epsilon: f64,
        p_explore: f64,
        eta: f64,
        knowledge: StudentKnowledge,
    },
    #[serde(rename = "dynamic")]
    DynamicEpsilon {
        epsilon0: f64,
        cutoff: u32,
        p_explore: f64,
        eta: f64,
        knowledge: StudentKnowledge,
    },
}

fn check_probability(name: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid(name, p, "must lie in [0, 1]"))
    }
}

impl StudentModel {
    pub fn static_model(p_success: f64) -> Result<Self> {
        let model = StudentModel::Static { p_success };
        model.validate()?;
        Ok(model)
    }

    /// Epsilon-greedy student with constant exploration rate and no prior knowledge.
    pub fn static_epsilon(epsilon: f64, p_explore: f64) -> Result<Self> {
        let model = StudentModel::StaticEpsilon {
            epsilon,
            p_explore,
            eta: DEFAULT_ETA,
            knowledge: StudentKnowledge::default(),
        };
        model.validate()?;
        Ok(model)
    }

    /// Decaying epsilon-greedy student with no prior knowledge.
    pub fn dynamic_epsilon(epsilon0: f64, cutoff: u32, p_explore: f64) -> Result<Self> {
        let model = StudentModel::DynamicEpsilon {
            epsilon0,
            cutoff,
            p_explore,
            eta: DEFAULT_ETA,
            knowledge: StudentKnowledge::default(),
        };
        model.validate()?;
        Ok(model)
    }

    /// Replaces the knowledge increment rate. Ignored by the static model.
    pub fn with_eta(mut self, new_eta: f64) -> Result<Self> {
        match &mut self {
            StudentModel::Static { .. } => {}
            StudentModel::StaticEpsilon { eta, .. } | StudentModel::DynamicEpsilon { eta, .. } => {
                *eta = new_eta
            }
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            StudentModel::Static { p_success } => check_probability("p_success", p_success),
            StudentModel::StaticEpsilon {
                epsilon,
                p_explore,
                eta,
                ..
            } => {
                check_probability("epsilon", epsilon)?;
                check_probability("p_explore", p_explore)?;
                check_probability("eta", eta)
            }
            StudentModel::DynamicEpsilon {
                epsilon0,
                cutoff,
                p_explore,
                eta,
                ..
            } => {
                check_probability("epsilon0", epsilon0)?;
                check_probability("p_explore", p_explore)?;
                check_probability("eta", eta)?;
                if cutoff == 0 {
                    return Err(Error::invalid("cutoff", cutoff, "must be at least 1"));
                }
                Ok(())
            }
        }
    }

    pub fn knowledge(&self) -> Option<&StudentKnowledge> {
        match self {
            StudentModel::Static { .. } => None,
            StudentModel::StaticEpsilon { knowledge, .. }
            | StudentModel::DynamicEpsilon { knowledge, .. } => Some(knowledge),
        }
    }

    /// Exploration rate after `t` attempted tasks.
    pub fn epsilon_at(&self, t: u32) -> f64 {
        match *self {
            StudentModel::Static { .. } => 0.0,
            StudentModel::StaticEpsilon { epsilon, .. } => epsilon,
            StudentModel::DynamicEpsilon {
                epsilon0, cutoff, ..
            } => {
                if t >= cutoff {
                    0.0
                } else {
                    let tau = cutoff as f64 / 5.0;
                    epsilon0 * (-(t as f64) / tau).exp()
                }
            }
        }
    }

    /// Answers `cell` as the `t`-th task and learns from a correct answer.
    ///
    /// Draws: the static model consumes one uniform. Epsilon models consume
    /// one for the exploration gate and a second only when exploring.
    pub fn attempt<R: Rng + ?Sized>(
        &mut self,
        cell: TaskCell,
        t: u32,
        rng: &mut R,
    ) -> AttemptOutcome {
        let epsilon = self.epsilon_at(t);
        match self {
            StudentModel::Static { p_success } => AttemptOutcome::from(unit_f64(rng) < *p_success),
            StudentModel::StaticEpsilon {
                p_explore,
                eta,
                knowledge,
                ..
            }
            | StudentModel::DynamicEpsilon {
                p_explore,
                eta,
                knowledge,
                ..
            } => {
                let outcome = if unit_f64(rng) < epsilon {
                    AttemptOutcome::from(unit_f64(rng) < *p_explore)
                } else {
                    AttemptOutcome::from(knowledge.passes(cell))
                };
                knowledge.update(cell, outcome, *eta);
                outcome
            }
        }
    }
}
