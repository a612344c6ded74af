//! Seeded cohort simulations and their aggregate metrics.
//!
//! A cohort is `iterations x num_students` independent student runs. Run
//! `r` covers iteration `r / num_students` and student `r % num_students`
//! and owns the random stream seeded by
//! [`derive_seed`](crate::rng::derive_seed). Runs are simulated in
//! parallel blocks and folded into the aggregate strictly in run order, so
//! the result does not depend on the number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{KnowledgeMatrix, TaskCell, NUM_LEVELS};
use crate::policy::{AttemptOutcome, PolicyParams};
use crate::rng::{derive_seed, seeded};
use crate::student::StudentModel;
use crate::taskgen::{generate_taskset, DecayParams, TASKSET_LEN};

/// Runs simulated per parallel block before folding.
const BLOCK_RUNS: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub num_students: u32,
    pub tasksets_per_student: u32,
    /// Independent repetitions of the whole cohort.
    pub iterations: u32,
    /// Template cloned into every run.
    pub model: StudentModel,
    pub policy: PolicyParams,
    pub decay: DecayParams,
    pub master_seed: u64,
}

impl ExperimentConfig {
    pub fn new(
        model: StudentModel,
        num_students: u32,
        tasksets_per_student: u32,
        iterations: u32,
        master_seed: u64,
    ) -> Self {
        Self {
            num_students,
            tasksets_per_student,
            iterations,
            model,
            policy: PolicyParams::default(),
            decay: DecayParams::default(),
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_students == 0 {
            return Err(Error::invalid("num_students", 0, "must be at least 1"));
        }
        if self.tasksets_per_student == 0 {
            return Err(Error::invalid(
                "tasksets_per_student",
                0,
                "must be at least 1",
            ));
        }
        if self.iterations == 0 {
            return Err(Error::invalid("iterations", 0, "must be at least 1"));
        }
        self.model.validate()?;
        PolicyParams::new(self.policy.lambda(), self.policy.neighbor_span())?;
        DecayParams::new(self.decay.factor())?;
        Ok(())
    }

    /// Tasks answered by one student run.
    pub fn tasks_per_run(&self) -> usize {
        self.tasksets_per_student as usize * TASKSET_LEN
    }

    pub fn total_runs(&self) -> usize {
        self.num_students as usize * self.iterations as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub student_id: u32,
    pub iteration: u32,
    /// Zero-based position within the student's run.
    pub task_index: u32,
    pub cell: TaskCell,
    pub outcome: AttemptOutcome,
}

#[derive(Debug, Clone)]
pub struct StudentRun {
    pub records: Vec<AttemptRecord>,
    pub final_matrix: KnowledgeMatrix,
}

/// Simulates one student with the stream derived from the master seed.
pub fn run_student(config: &ExperimentConfig, iteration: u32, student: u32) -> Result<StudentRun> {
    let seed = derive_seed(config.master_seed, iteration as u64, student as u64);
    run_student_seeded(config, iteration, student, seed)
}

/// Simulates one student with an explicit stream seed.
///
/// Each task-set is drawn from the matrix as it stands at the start of the
/// set; the ten answers then update the matrix one by one.
pub fn run_student_seeded(
    config: &ExperimentConfig,
    iteration: u32,
    student: u32,
    seed: u64,
) -> Result<StudentRun> {
    let mut rng = seeded(seed);
    let mut matrix = KnowledgeMatrix::new();
    let mut model = config.model.clone();
    let mut records = Vec::with_capacity(config.tasks_per_run());
    let mut t = 0u32;
    for _ in 0..config.tasksets_per_student {
        let set = generate_taskset(&matrix, &config.decay, &mut rng)?;
        for cell in set.iter() {
            let outcome = model.attempt(cell, t, &mut rng);
            matrix.apply_update(cell, outcome, &config.policy)?;
            records.push(AttemptRecord {
                student_id: student,
                iteration,
                task_index: t,
                cell,
                outcome,
            });
            t += 1;
        }
    }
    Ok(StudentRun {
        records,
        final_matrix: matrix,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub task_index: u32,
    pub mean_success_rate: f64,
    pub sample_count: u64,
}

/// Success curve for one difficulty column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelCurve {
    /// One-based level, 1..=10.
    pub level: u8,
    pub points: Vec<CurvePoint>,
}

impl LevelCurve {
    pub fn total_samples(&self) -> u64 {
        self.points.iter().map(|p| p.sample_count).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    /// Sample standard deviation; zero for a single observation.
    pub std: f64,
    pub count: u64,
}

impl Moments {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Moments {
                mean: 0.0,
                std: 0.0,
                count: 0,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Moments {
            mean,
            std,
            count: n as u64,
        }
    }
}

/// When runs first reach a level: nearest-rank percentiles of the task
/// index of the first attempt at that level, over runs that reached it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelOnset {
    pub level: u8,
    pub runs: u64,
    pub p5: u32,
    pub p50: u32,
    pub p95: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsAggregate {
    /// One curve per level 1..=10; levels never attempted have no points.
    pub level_curves: Vec<LevelCurve>,
    pub final_expected_level: Moments,
    /// Onsets for levels reached by at least one run.
    pub level_onsets: Vec<LevelOnset>,
    pub attempts: u64,
    pub successes: u64,
}

impl MetricsAggregate {
    pub fn pooled_success_rate(&self) -> f64 {
        if self.attempts == 0 {
            0.0
        } else {
            self.successes as f64 / self.attempts as f64
        }
    }

    pub fn curve(&self, level: u8) -> Option<&LevelCurve> {
        self.level_curves.iter().find(|c| c.level == level)
    }

    pub fn onset(&self, level: u8) -> Option<&LevelOnset> {
        self.level_onsets.iter().find(|o| o.level == level)
    }
}

/// Running sums behind the level curves, fed one run at a time.
struct CurveAccumulator {
    horizon: usize,
    rate_sums: Vec<f64>,
    counts: Vec<u64>,
    first_attempts: [Vec<u32>; NUM_LEVELS],
    attempts: u64,
    successes: u64,
}

impl CurveAccumulator {
    fn new(horizon: usize) -> Self {
        Self {
            horizon,
            rate_sums: vec![0.0; NUM_LEVELS * horizon],
            counts: vec![0; NUM_LEVELS * horizon],
            first_attempts: Default::default(),
            attempts: 0,
            successes: 0,
        }
    }

    /// Adds one run's attempts, given in task order.
    fn add_run<'a>(&mut self, attempts: impl IntoIterator<Item = &'a AttemptRecord>) {
        let mut tried = [0u32; NUM_LEVELS];
        let mut passed = [0u32; NUM_LEVELS];
        for rec in attempts {
            let level = rec.cell.level();
            let index = rec.task_index as usize;
            if tried[level] == 0 {
                self.first_attempts[level].push(rec.task_index);
            }
            tried[level] += 1;
            self.attempts += 1;
            if rec.outcome.is_correct() {
                passed[level] += 1;
                self.successes += 1;
            }
            let slot = level * self.horizon + index;
            self.rate_sums[slot] += passed[level] as f64 / tried[level] as f64;
            self.counts[slot] += 1;
        }
    }

    fn curves(&self) -> Vec<LevelCurve> {
        (0..NUM_LEVELS)
            .map(|level| {
                let base = level * self.horizon;
                let points = (0..self.horizon)
                    .filter(|&i| self.counts[base + i] > 0)
                    .map(|i| CurvePoint {
                        task_index: i as u32,
                        mean_success_rate: self.rate_sums[base + i] / self.counts[base + i] as f64,
                        sample_count: self.counts[base + i],
                    })
                    .collect();
                LevelCurve {
                    level: level as u8 + 1,
                    points,
                }
            })
            .collect()
    }

    fn onsets(&self) -> Vec<LevelOnset> {
        self.first_attempts
            .iter()
            .enumerate()
            .filter(|(_, firsts)| !firsts.is_empty())
            .map(|(level, firsts)| {
                let mut sorted = firsts.clone();
                sorted.sort_unstable();
                LevelOnset {
                    level: level as u8 + 1,
                    runs: sorted.len() as u64,
                    p5: nearest_rank(&sorted, 0.05),
                    p50: nearest_rank(&sorted, 0.50),
                    p95: nearest_rank(&sorted, 0.95),
                }
            })
            .collect()
    }
}

fn nearest_rank(sorted: &[u32], q: f64) -> u32 {
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Runs the whole cohort and aggregates curves and final expected levels.
pub fn run_cohort(config: &ExperimentConfig) -> Result<MetricsAggregate> {
    config.validate()?;
    let total = config.total_runs();
    let students = config.num_students as usize;
    let mut acc = CurveAccumulator::new(config.tasks_per_run());
    let mut finals = Vec::with_capacity(total);

    for block_start in (0..total).step_by(BLOCK_RUNS) {
        let block_end = (block_start + BLOCK_RUNS).min(total);
        let runs: Vec<StudentRun> = (block_start..block_end)
            .into_par_iter()
            .map(|r| run_student(config, (r / students) as u32, (r % students) as u32))
            .collect::<Result<_>>()?;
        for run in &runs {
            acc.add_run(&run.records);
            finals.push(run.final_matrix.expected_level()?);
        }
    }

    Ok(MetricsAggregate {
        level_curves: acc.curves(),
        final_expected_level: Moments::of(&finals),
        level_onsets: acc.onsets(),
        attempts: acc.attempts,
        successes: acc.successes,
    })
}

/// Every attempt of every run, in run order. Meant for small cohorts.
pub fn collect_records(config: &ExperimentConfig) -> Result<Vec<AttemptRecord>> {
    config.validate()?;
    let students = config.num_students as usize;
    let runs: Vec<StudentRun> = (0..config.total_runs())
        .into_par_iter()
        .map(|r| run_student(config, (r / students) as u32, (r % students) as u32))
        .collect::<Result<_>>()?;
    Ok(runs.into_iter().flat_map(|run| run.records).collect())
}

/// Per-level cumulative success curves from raw attempt records.
///
/// Each (iteration, student) run contributes, at every index where it
/// attempted level `l`, its running success rate on `l`. Points average
/// those rates over runs. Records are ordered by (iteration, student,
/// task_index) first, matching the fold order of [`run_cohort`].
pub fn level_curves(records: &[AttemptRecord]) -> Vec<LevelCurve> {
    let horizon = records
        .iter()
        .map(|r| r.task_index as usize + 1)
        .max()
        .unwrap_or(0);
    let mut sorted: Vec<&AttemptRecord> = records.iter().collect();
    sorted.sort_by_key(|r| (r.iteration, r.student_id, r.task_index));
    let mut acc = CurveAccumulator::new(horizon);
    for run in sorted.chunk_by(|a, b| (a.iteration, a.student_id) == (b.iteration, b.student_id)) {
        acc.add_run(run.iter().copied());
    }
    acc.curves()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub label: String,
    pub expected_level_mean: f64,
    pub expected_level_std: f64,
    pub pct_change_vs_baseline: f64,
}

/// Comparison table of final expected levels, baseline row first.
pub fn summarize(
    aggregates: &[(String, MetricsAggregate)],
    baseline: &str,
) -> Result<Vec<SummaryRow>> {
    let base = aggregates
        .iter()
        .position(|(label, _)| label == baseline)
        .ok_or_else(|| Error::UnknownBaseline(baseline.to_string()))?;
    let base_mean = aggregates[base].1.final_expected_level.mean;
    let order = std::iter::once(base).chain((0..aggregates.len()).filter(|&i| i != base));
    Ok(order
        .map(|i| {
            let (label, agg) = &aggregates[i];
            let mean = agg.final_expected_level.mean;
            SummaryRow {
                label: label.clone(),
                expected_level_mean: mean,
                expected_level_std: agg.final_expected_level.std,
                pct_change_vs_baseline: if i == base {
                    0.0
                } else {
                    (mean - base_mean) / base_mean * 100.0
                },
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(student_id: u32, task_index: u32, level: usize, correct: bool) -> AttemptRecord {
        AttemptRecord {
            student_id,
            iteration: 0,
            task_index,
            cell: TaskCell::new(0, level).unwrap(),
            outcome: correct.into(),
        }
    }

    fn small(model: StudentModel) -> ExperimentConfig {
        ExperimentConfig::new(model, 4, 3, 2, 11)
    }

    #[test]
    fn cumulative_rate_for_one_student() {
        let curves = level_curves(&[rec(0, 0, 0, true), rec(0, 1, 0, false)]);
        let pts = &curves[0].points;
        assert_eq!(pts.len(), 2);
        assert_eq!(
            (pts[0].mean_success_rate, pts[1].mean_success_rate),
            (1.0, 0.5)
        );
        assert!(curves[9].points.is_empty());
    }

    #[test]
    fn rates_average_across_students() {
        let curves = level_curves(&[rec(0, 3, 2, true), rec(1, 3, 2, false)]);
        let pts = &curves[2].points;
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].task_index, 3);
        assert_eq!(pts[0].mean_success_rate, 0.5);
        assert_eq!(pts[0].sample_count, 2);
    }

    #[test]
    fn empty_records_give_empty_curves() {
        let curves = level_curves(&[]);
        assert_eq!(curves.len(), NUM_LEVELS);
        assert!(curves.iter().all(|c| c.points.is_empty()));
    }

    #[test]
    fn one_taskset_is_ten_records() {
        let config = ExperimentConfig::new(StudentModel::static_model(0.5).unwrap(), 1, 1, 1, 3);
        let run = run_student(&config, 0, 0).unwrap();
        assert_eq!(run.records.len(), 10);
        assert!(run
            .records
            .iter()
            .enumerate()
            .all(|(i, r)| r.task_index == i as u32));
    }

    #[test]
    fn zero_lambda_keeps_the_initial_matrix() {
        let mut config =
            ExperimentConfig::new(StudentModel::static_model(0.7).unwrap(), 1, 20, 1, 3);
        config.policy = PolicyParams::new(0.0, 1).unwrap();
        let run = run_student(&config, 0, 0).unwrap();
        assert_eq!(run.final_matrix, KnowledgeMatrix::new());
    }

    #[test]
    fn perfect_student_advances() {
        let config = ExperimentConfig::new(StudentModel::static_model(1.0).unwrap(), 1, 50, 1, 3);
        let run = run_student(&config, 0, 0).unwrap();
        assert!(run.final_matrix.expected_level().unwrap() > 1.0);
        assert!(run.records.iter().all(|r| r.outcome.is_correct()));
    }

    #[test]
    fn cohort_matches_curves_from_records() {
        for model in [
            StudentModel::static_model(0.6).unwrap(),
            StudentModel::dynamic_epsilon(0.7, 10, 0.5).unwrap(),
        ] {
            let config = small(model);
            let agg = run_cohort(&config).unwrap();
            let records = collect_records(&config).unwrap();
            assert_eq!(records.len(), 4 * 2 * 3 * 10);
            assert_eq!(agg.attempts, records.len() as u64);
            assert_eq!(agg.level_curves, level_curves(&records));
        }
    }

    #[test]
    fn cohort_rejects_invalid_config() {
        let mut config = small(StudentModel::static_model(0.5).unwrap());
        config.iterations = 0;
        assert!(run_cohort(&config).is_err());
    }

    #[test]
    fn moments() {
        let m = Moments::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.mean, 2.5);
        assert!((m.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(Moments::of(&[7.0]).std, 0.0);
    }

    #[test]
    fn nearest_rank_percentiles() {
        let v: Vec<u32> = (1..=20).collect();
        assert_eq!(nearest_rank(&v, 0.05), 1);
        assert_eq!(nearest_rank(&v, 0.5), 10);
        assert_eq!(nearest_rank(&v, 0.95), 19);
        assert_eq!(nearest_rank(&[4], 0.95), 4);
    }

    fn agg_with_mean(mean: f64) -> MetricsAggregate {
        MetricsAggregate {
            level_curves: Vec::new(),
            final_expected_level: Moments {
                mean,
                std: 0.0,
                count: 1,
            },
            level_onsets: Vec::new(),
            attempts: 0,
            successes: 0,
        }
    }

    #[test]
    fn summary_percent_change() {
        let aggs = vec![
            ("variant".to_string(), agg_with_mean(6.0)),
            ("base".to_string(), agg_with_mean(5.0)),
        ];
        let rows = summarize(&aggs, "base").unwrap();
        assert_eq!(rows[0].label, "base");
        assert_eq!(rows[0].pct_change_vs_baseline, 0.0);
        assert!((rows[1].pct_change_vs_baseline - 20.0).abs() < 1e-12);

        let single = vec![("only".to_string(), agg_with_mean(3.0))];
        assert_eq!(
            summarize(&single, "only").unwrap()[0].pct_change_vs_baseline,
            0.0
        );
        assert!(matches!(
            summarize(&single, "nope"),
            Err(Error::UnknownBaseline(_))
        ));
    }
}
