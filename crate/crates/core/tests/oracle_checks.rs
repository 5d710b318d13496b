//! Density-matrix oracle against the closed forms.

use qae_lab::amplitude_model::outcome_probs;
use qae_lab::fisher::{classical_fisher, quantum_fisher};
use qae_lab::oracle::{
    evolve, measure_probs, numeric_classical_fisher, numeric_qfi, run_verification, UnitaryFactory,
    VerificationConfig,
};
use qae_lab::{Method, NoiseModel};

#[test]
fn default_grid_passes() {
    let report = run_verification(&VerificationConfig::default()).unwrap();
    assert!(report.cases.len() >= 960);
    let failed: Vec<_> = report.cases.iter().filter(|c| !c.passed()).collect();
    assert!(failed.is_empty(), "{} failures, first {:?}", failed.len(), failed.first());
    assert!(report.max_prob_dev() <= 1e-10);
    assert!(report.max_qfi_rel_dev() <= 1e-8);
}

#[test]
fn injected_fault_is_detected() {
    let config = VerificationConfig { max_n: 2, seeds: 4, fault: Some(1e-3), ..Default::default() };
    let report = run_verification(&config).unwrap();
    assert!(!report.all_passed());
}

#[test]
fn g_probabilities_do_not_depend_on_w() {
    for m in 0..4 {
        let reference = {
            let f = UnitaryFactory::new(3, 0.44, 0).unwrap();
            measure_probs(&evolve(Method::GBased, m, &f, 0.93).unwrap(), Method::GBased)
        };
        for seed in 1..6 {
            let f = UnitaryFactory::new(3, 0.44, seed).unwrap();
            let p = measure_probs(&evolve(Method::GBased, m, &f, 0.93).unwrap(), Method::GBased);
            assert!((p.0 - reference.0).abs() < 1e-12 && (p.1 - reference.1).abs() < 1e-12);
        }
    }
}

#[test]
fn q_probabilities_and_fisher_at_pi_over_8() {
    let theta = std::f64::consts::FRAC_PI_8;
    let f = UnitaryFactory::new(2, theta, 21).unwrap();
    let noise = NoiseModel::depolarizing(0.9).unwrap();
    let (p0, p1) = measure_probs(&evolve(Method::QBased, 1, &f, 0.9).unwrap(), Method::QBased);
    let (c0, c1) = outcome_probs(Method::QBased, theta, 1, &noise, f.size()).unwrap();
    assert!((p0 - c0).abs() <= 1e-10 && (p1 - c1).abs() <= 1e-10);

    let numeric = numeric_classical_fisher(Method::QBased, 1, &f, 0.9).unwrap();
    let closed = classical_fisher(Method::QBased, theta, 2.0, &noise, f.size()).unwrap();
    assert!((numeric - closed).abs() <= 1e-6 * closed, "{numeric} vs {closed}");

    let qfi = numeric_qfi(Method::QBased, 1, &f, 0.9).unwrap();
    let closed = quantum_fisher(2.0, &noise, f.size()).unwrap();
    assert!((qfi - closed).abs() <= 1e-8 * closed);
}

#[test]
fn qfi_is_angle_independent() {
    let noise = NoiseModel::depolarizing(0.8).unwrap();
    for theta in [0.1, 0.6, 1.3] {
        let f = UnitaryFactory::new(2, theta, 4).unwrap();
        let qfi = numeric_qfi(Method::GBased, 2, &f, 0.8).unwrap();
        let closed = quantum_fisher(5.0, &noise, f.size()).unwrap();
        assert!((qfi - closed).abs() <= 1e-8 * closed, "{theta}: {qfi} vs {closed}");
    }
}
