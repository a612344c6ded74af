use sbts_core::{collect_records, run_cohort, ExperimentConfig, MetricsAggregate, StudentModel};

fn desk(model: StudentModel) -> ExperimentConfig {
    ExperimentConfig::new(model, 100, 50, 10, 2024)
}

fn with_threads(threads: usize, config: &ExperimentConfig) -> MetricsAggregate {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(|| run_cohort(config).unwrap())
}

#[test]
fn aggregate_is_independent_of_worker_count() {
    // more runs than one block so the block boundaries are exercised
    let config = ExperimentConfig::new(
        StudentModel::dynamic_epsilon(0.7, 100, 0.5).unwrap(),
        300,
        8,
        3,
        17,
    );
    let one = with_threads(1, &config);
    let four = with_threads(4, &config);
    assert_eq!(one, four);
    assert_eq!(one, run_cohort(&config).unwrap());
}

#[test]
fn record_count_is_exact() {
    let config = ExperimentConfig::new(StudentModel::static_epsilon(0.3, 0.7).unwrap(), 7, 3, 4, 1);
    let records = collect_records(&config).unwrap();
    assert_eq!(records.len(), 7 * 4 * 3 * 10);
    assert!(records.iter().all(|r| (r.task_index as usize) < 3 * 10));
    assert_eq!(run_cohort(&config).unwrap().attempts, records.len() as u64);
}

#[test]
fn static_pooled_success_rate_matches_p() {
    let agg = run_cohort(&desk(StudentModel::static_model(0.7).unwrap())).unwrap();
    let n = agg.attempts as f64;
    let sigma = (0.7 * 0.3 / n).sqrt();
    assert!(
        (agg.pooled_success_rate() - 0.7).abs() <= 4.0 * sigma,
        "{}",
        agg.pooled_success_rate()
    );
}

#[test]
fn final_level_grows_with_success_probability() {
    let levels: Vec<f64> = [0.2, 0.5, 0.7, 0.9]
        .iter()
        .map(|&p| {
            run_cohort(&desk(StudentModel::static_model(p).unwrap()))
                .unwrap()
                .final_expected_level
                .mean
        })
        .collect();
    assert!(levels.windows(2).all(|w| w[0] < w[1]), "{levels:?}");
}

#[test]
fn curves_have_ten_levels_and_valid_rates() {
    let agg = run_cohort(&desk(StudentModel::dynamic_epsilon(0.7, 100, 0.5).unwrap())).unwrap();
    assert_eq!(agg.level_curves.len(), 10);
    for curve in &agg.level_curves {
        for p in &curve.points {
            assert!((0.0..=1.0).contains(&p.mean_success_rate));
            assert!(p.sample_count > 0);
        }
    }
    assert_eq!(agg.final_expected_level.count, 1000);
}
