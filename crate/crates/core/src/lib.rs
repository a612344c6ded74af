//! Skill-based task selection.
//!
//! A tutor keeps an 8 x 10 probability matrix over (topic, difficulty)
//! cells, samples task-sets from it, and shifts mass right/down after
//! correct answers and left/up after wrong ones. The crate also provides
//! simulated students and a deterministic cohort harness for evaluating
//! the selector.

pub mod cli;
pub mod error;
pub mod harness;
pub mod matrix;
pub mod policy;
pub mod rng;
pub mod student;
pub mod taskgen;

pub use error::{Error, Result};
pub use harness::{
    collect_records, level_curves, run_cohort, run_student, summarize, AttemptRecord,
    ExperimentConfig, LevelCurve, MetricsAggregate, SummaryRow,
};
pub use matrix::{cell_skill, KnowledgeMatrix, TaskCell, NUM_LEVELS, NUM_TOPICS};
pub use policy::{apply_update, beta, update_targets, AttemptOutcome, PolicyParams};
pub use student::{update_knowledge, StudentKnowledge, StudentModel};
pub use taskgen::{generate_taskset, sample_cell, DecayParams, TaskSet};
