use std::f64::consts::TAU;

use proptest::prelude::*;
use qwgan::circuit::{random_target, GeneratorEnsemble, InitialState, Layout};
use qwgan::parallel::Execution;
use qwgan::pauli::PauliObservable;
use qwgan::qcore::random::random_density;
use qwgan::qcore::DensityMatrix;
use qwgan::trainer::{
    full_gradient, grad_discriminator, grad_theta_shift, noisy_expectation, train, train_seeds,
    AngleInit, DiscriminatorGradient, TrainingConfig,
};
use qwgan::wasserstein::{DualVariables, RegularizerMode};
use qwgan::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn instance(
    qubits: usize,
    rank: usize,
    seed: u64,
) -> (GeneratorEnsemble, DensityMatrix, DualVariables) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layout = Layout::generic(qubits, 1).unwrap();
    let g = GeneratorEnsemble::random(&layout, rank, InitialState::Zero, &mut rng).unwrap();
    let q = random_density(1 << qubits, 2, &mut rng);
    let k = 1 << (2 * qubits);
    let a: Vec<f64> = (0..k).map(|_| rng.gen_range(-0.3..0.3)).collect();
    let b: Vec<f64> = (0..k).map(|_| rng.gen_range(-0.3..0.3)).collect();
    (
        g,
        q,
        DualVariables::from_coefficients(qubits, &a, &b, 2.0).unwrap(),
    )
}

fn one_qubit_config(epochs: usize) -> (TrainingConfig, DensityMatrix) {
    let layout = Layout::generic(1, 3).unwrap();
    let (target, _) = random_target(&layout, 1, 1003).unwrap();
    (TrainingConfig::new(layout, 1, 2.0, 0.1, epochs), target)
}

#[test]
fn commuting_form_matches_frechet_for_scalar_duals() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for qubits in [1, 2] {
        let id = |c: f64| {
            PauliObservable::new(qubits, vec![(c, "I".repeat(qubits).parse().unwrap())]).unwrap()
        };
        let dv = DualVariables::new(id(0.4), id(-0.7), 1.3).unwrap();
        let p = random_density(1 << qubits, 2, &mut rng);
        let q = random_density(1 << qubits, 1, &mut rng);
        let exact = grad_discriminator(
            &p,
            &q,
            &dv,
            RegularizerMode::Exact,
            DiscriminatorGradient::FrechetExact,
        )
        .unwrap();
        let commuting = grad_discriminator(
            &p,
            &q,
            &dv,
            RegularizerMode::Exact,
            DiscriminatorGradient::CommutingForm,
        )
        .unwrap();
        for (a, b) in exact
            .0
            .iter()
            .chain(&exact.1)
            .zip(commuting.0.iter().chain(&commuting.1))
        {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }
}

#[test]
fn gradient_report_shapes() {
    let (g, q, dv) = instance(2, 3, 32);
    let r = full_gradient(&g, &q, &dv, RegularizerMode::Exact).unwrap();
    assert!(r.is_finite());
    assert_eq!(r.d_logits.len(), 3);
    assert_eq!(r.d_theta.len(), 3);
    assert!(r.d_theta.iter().all(|t| t.len() == g.circuits()[0].len()));
    assert_eq!(r.d_alpha.len(), 16);
    assert_eq!(r.d_beta.len(), 16);
    assert!(r.d_logits.iter().sum::<f64>().abs() < 1e-12);
}

#[test]
fn noise_matches_requested_distribution() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let n = 20_000;
    let draws: Vec<f64> = (0..n)
        .map(|_| noisy_expectation(0.25, 0.1, &mut rng))
        .collect();
    let mean = draws.iter().sum::<f64>() / n as f64;
    let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    assert!(
        (mean - 0.25).abs() < 4.0 * 0.1 / (n as f64).sqrt(),
        "mean {mean}"
    );
    assert!((var.sqrt() - 0.1).abs() < 0.003, "std {}", var.sqrt());
    assert_eq!(noisy_expectation(0.25, 0.0, &mut rng), 0.25);
}

#[test]
fn runs_are_reproducible_per_seed() {
    let (mut cfg, target) = one_qubit_config(30);
    cfg.noise_sigma = 0.05;
    cfg.seed = 4;
    let a = train(&cfg, &target).unwrap();
    let b = train(&cfg, &target).unwrap();
    assert_eq!(a.records, b.records);
    assert_eq!(a.to_csv(), b.to_csv());
    cfg.seed = 5;
    let c = train(&cfg, &target).unwrap();
    assert_ne!(a.records, c.records);
}

#[test]
fn seed_batches_match_across_execution_modes() {
    let (cfg, target) = one_qubit_config(20);
    let seq = train_seeds(&cfg, &target, &[0, 1, 2], Execution::Sequential);
    let par = train_seeds(&cfg, &target, &[0, 1, 2], Execution::Parallel);
    for (s, p) in seq.iter().zip(&par) {
        assert_eq!(s.as_ref().unwrap().records, p.as_ref().unwrap().records);
    }
}

#[test]
fn history_is_bounded_and_improves() {
    let (cfg, target) = one_qubit_config(150);
    let h = train(&cfg, &target).unwrap();
    assert_eq!(h.records.len(), 151);
    assert!(h
        .records
        .iter()
        .all(|r| r.loss.is_finite() && r.fidelity <= 1.0 + 1e-9 && r.fidelity >= 0.0));
    assert!(h.final_fidelity() > h.records[0].fidelity);
    assert!(h.records.iter().all(|r| r.wall_ms == 0.0));
    let csv = h.to_csv();
    assert_eq!(csv.lines().count(), 152);
}

#[test]
fn stops_immediately_when_target_is_the_input() {
    let layout = Layout::generic(2, 1).unwrap();
    let mut cfg = TrainingConfig::new(layout, 1, 2.0, 0.1, 100);
    cfg.angle_init = AngleInit::Zero;
    cfg.stop_at_fidelity = Some(0.999);
    let target = DensityMatrix::basis(4, 0).unwrap();
    let h = train(&cfg, &target).unwrap();
    assert_eq!(h.records.len(), 1);
    assert!((h.final_fidelity() - 1.0).abs() < 1e-12);
    assert_eq!(h.epochs_to_fidelity(0.999), Some(0));
}

#[test]
fn divergence_aborts_with_epoch() {
    let (mut cfg, target) = one_qubit_config(50);
    cfg.eta_d = 1e300;
    match train(&cfg, &target) {
        Err(Error::TrainingAborted { epoch, .. }) => assert!(epoch <= 50),
        other => panic!(
            "expected an aborted run, got {:?}",
            other.map(|h| h.final_fidelity())
        ),
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let (cfg, target) = one_qubit_config(5);
    let mut bad = cfg.clone();
    bad.eta_g = -0.1;
    assert!(train(&bad, &target).is_err());
    let mut bad = cfg.clone();
    bad.noise_sigma = f64::NAN;
    assert!(train(&bad, &target).is_err());
    let mut bad = cfg.clone();
    bad.rank = 0;
    assert!(train(&bad, &target).is_err());
    assert!(train(&cfg, &DensityMatrix::maximally_mixed(4)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn shift_rule_is_two_pi_periodic(seed in any::<u64>(), qubits in 1usize..=2) {
        let (g, q, dv) = instance(qubits, 2, seed);
        let base = grad_theta_shift(&g, &q, &dv, RegularizerMode::Exact).unwrap().concat();
        let mut shifted = g.clone();
        let angles: Vec<f64> = g.flat_angles().iter().map(|a| a + TAU).collect();
        shifted.set_flat_angles(&angles).unwrap();
        let again = grad_theta_shift(&shifted, &q, &dv, RegularizerMode::Exact).unwrap().concat();
        for (a, b) in base.iter().zip(&again) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }
}
