//! Monte-Carlo behaviour of the maximum-likelihood estimator.

use qae_lab::estimator::{
    build_eis_schedule, crb_curves, mle_estimate, prefix_estimates, run_experiment, ExperimentConfig,
    MeasurementRecord, GRID_POINTS,
};
use qae_lab::{EstimationProblem, Method, NoiseModel, SystemSize};

fn noiseless_config(rounds: usize, reps: usize, methods: Vec<Method>) -> ExperimentConfig {
    ExperimentConfig {
        targets: vec![1.0 / 3.0],
        noise: NoiseModel::noiseless(),
        size: SystemSize::Infinite,
        rounds,
        repetitions: reps,
        methods,
        ..ExperimentConfig::default()
    }
}

#[test]
fn noiseless_rmse_tracks_the_cramer_rao_bound() {
    let config = noiseless_config(15, 200, vec![Method::GBased]);
    let table = run_experiment(&config).unwrap();
    let cell = table.cell(Method::GBased, 1.0 / 3.0);
    assert_eq!(cell.len(), 15);
    for row in &cell[cell.len() - 5..] {
        let ratio = row.rmse / row.crb_classical;
        assert!((0.8..=1.6).contains(&ratio), "k {}: rmse/CRB = {ratio}", row.k);
    }
}

#[test]
fn estimates_fall_within_three_sigma() {
    let theta = EstimationProblem::from_amplitude(1.0 / 3.0).unwrap().theta();
    let noise = NoiseModel::noiseless();
    for method in Method::ALL {
        let schedule = build_eis_schedule(1.2, 15, 100, method).unwrap();
        let f_total: f64 = schedule
            .rounds
            .iter()
            .map(|r| {
                let n_q = method.query_count(r.m) as f64;
                r.shots as f64 * 4.0 * n_q * n_q
            })
            .sum();
        let radius = 3.0 / f_total.sqrt();
        let inside = (0..200u64)
            .filter(|&rep| {
                let record =
                    MeasurementRecord::sample(method, theta, &schedule, &noise, SystemSize::Infinite, 11, rep).unwrap();
                let est = mle_estimate(&record, &noise, SystemSize::Infinite).unwrap();
                (est - theta).abs() <= radius
            })
            .count();
        assert!(inside >= 198, "{method}: {inside} of 200 within 3 sigma");
    }
}

#[test]
fn experiments_are_reproducible() {
    let config = ExperimentConfig {
        targets: vec![1.0 / 6.0, 1.0 / 12.0],
        repetitions: 12,
        rounds: 20,
        ..ExperimentConfig::default()
    };
    let a = run_experiment(&config).unwrap();
    let b = run_experiment(&config).unwrap();
    assert_eq!(a, b);
    for method in Method::ALL {
        for &t in &config.targets {
            let cell = a.cell(method, t);
            assert!(cell.windows(2).all(|w| w[1].n_q_tot > w[0].n_q_tot));
            assert!(cell.windows(2).all(|w| w[1].crb_classical <= w[0].crb_classical));
        }
    }
    let other = run_experiment(&ExperimentConfig { master_seed: 2, ..config }).unwrap();
    assert_ne!(a, other);
}

#[test]
fn prefix_estimates_agree_with_truncated_records() {
    let noise = NoiseModel::depolarizing(0.99).unwrap();
    let size = SystemSize::Finite { log2_dim: 100 };
    let theta = EstimationProblem::from_amplitude(1.0 / 6.0).unwrap().theta();
    for method in Method::ALL {
        let schedule = build_eis_schedule(1.2, 25, 100, method).unwrap();
        let record = MeasurementRecord::sample(method, theta, &schedule, &noise, size, 5, 0).unwrap();
        let prefixes = prefix_estimates(&record, &noise, size, GRID_POINTS).unwrap();
        for j in [0, 7, prefixes.len() - 1] {
            let truncated = MeasurementRecord::new(method, record.outcomes[..=j].to_vec()).unwrap();
            assert_eq!(prefixes[j], mle_estimate(&truncated, &noise, size).unwrap());
        }
    }
}

#[test]
fn crb_columns_are_ordered() {
    let config = ExperimentConfig::default();
    for method in Method::ALL {
        for &a in &config.targets {
            for row in crb_curves(&config, a, method).unwrap() {
                assert!(row.quantum <= row.classical * (1.0 + 1e-12));
                assert!(row.noiseless <= row.quantum * (1.0 + 1e-12));
            }
        }
    }
}
