use std::f64::consts::PI;

use proptest::prelude::*;
use qwgan::circuit::{
    angles_from_csv, angles_to_csv, random_target, softmax, Circuit, GeneratorEnsemble,
    InitialState, Layout,
};
use qwgan::pauli::{gate_unitary, Pauli, RotationGate};
use qwgan::qcore::{trace_distance, ComplexMatrix, DensityMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn gates_apply_in_listed_order() {
    let rx = RotationGate::single(0, Pauli::X, 0.4).unwrap();
    let rz = RotationGate::single(0, Pauli::Z, 1.1).unwrap();
    let c = Circuit::new(1, vec![rx.clone(), rz.clone()]).unwrap();
    let want = gate_unitary(&rz, 1)
        .unwrap()
        .matmul(&gate_unitary(&rx, 1).unwrap());
    assert!((&c.unitary() - &want).max_abs() < 1e-15);
}

#[test]
fn zero_angle_layouts_are_identity() {
    for layout in [Layout::ionq(4).unwrap(), Layout::generic(3, 2).unwrap()] {
        let u = layout.zero_circuit().unitary();
        assert!(
            (&u - &ComplexMatrix::identity(u.rows())).max_abs() < 1e-15,
            "{}",
            layout.name()
        );
    }
}

#[test]
fn layout_sizes() {
    assert_eq!(Layout::generic(2, 3).unwrap().parameter_count(), 27);
    assert_eq!(Layout::generic(3, 1).unwrap().parameter_count(), 15);
    assert_eq!(Layout::ionq(4).unwrap().parameter_count(), 18);
    assert!(Layout::by_name("nope", 2, 1).is_err());
}

#[test]
fn equal_mixture_of_identity_and_flip_is_maximally_mixed() {
    let flip = Circuit::new(1, vec![RotationGate::single(0, Pauli::X, PI).unwrap()]).unwrap();
    let g = GeneratorEnsemble::new(
        vec![0.3, 0.3],
        vec![Circuit::empty(1), flip],
        InitialState::Zero,
    )
    .unwrap();
    let p = g.generate_state();
    assert!((p.matrix() - DensityMatrix::maximally_mixed(2).matrix()).max_abs() < 1e-15);
}

#[test]
fn layout_and_angles_round_trip_through_text() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let layout = Layout::ionq(4).unwrap();
    let back = Layout::from_toml(&layout.to_toml()).unwrap();
    assert_eq!(back.templates(), layout.templates());
    let circuits: Vec<Circuit> = (0..2).map(|_| layout.random_circuit(&mut rng)).collect();
    let angles = angles_from_csv(&angles_to_csv(&circuits)).unwrap();
    for (c, a) in circuits.iter().zip(&angles) {
        assert_eq!(&c.angles(), a);
        assert!((&back.bind(a).unwrap().unitary() - &c.unitary()).max_abs() < 1e-15);
    }
}

#[test]
fn targets_differ_across_seeds() {
    let layout = Layout::generic(2, 3).unwrap();
    let targets: Vec<DensityMatrix> = (0..20)
        .map(|s| random_target(&layout, 1, 1000 + s).unwrap().0)
        .collect();
    for (i, a) in targets.iter().enumerate() {
        for b in &targets[i + 1..] {
            assert!(trace_distance(a, b).unwrap() > 1e-3);
        }
    }
    let (again, _) = random_target(&layout, 1, 1000).unwrap();
    assert_eq!(again.matrix(), targets[0].matrix());
}

#[test]
fn maximally_entangled_input_requires_even_register() {
    assert!(InitialState::MaximallyEntangled.density(3).is_err());
    let rho = InitialState::MaximallyEntangled.density(2).unwrap();
    assert!((rho.trace().re - 1.0).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn generated_states_are_valid(seed in any::<u64>(), qubits in 1usize..=3, rank in 1usize..=3, depth in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layout = Layout::generic(qubits, depth).unwrap();
        let mut g = GeneratorEnsemble::random(&layout, rank, InitialState::Zero, &mut rng).unwrap();
        let logits: Vec<f64> = (0..rank).map(|i| (seed.rotate_left(i as u32 * 7) % 100) as f64 / 25.0 - 2.0).collect();
        g.set_logits(&logits).unwrap();
        let p = g.generate_state();
        prop_assert!(p.validate().is_ok());
        prop_assert!((p.matrix().trace().re - 1.0).abs() < 1e-12);
        let w = softmax(&logits);
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let purity: f64 = g.probabilities().iter().zip(g.component_states()).flat_map(|(pi, ri)| {
            g.probabilities().iter().zip(g.component_states()).map(move |(pj, rj)| pi * pj * ri.trace_product(&rj).re).collect::<Vec<_>>()
        }).sum();
        prop_assert!((p.purity() - purity).abs() < 1e-12);
    }

    #[test]
    fn circuits_are_unitary(seed in any::<u64>(), qubits in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = Layout::generic(qubits, 2).unwrap().random_circuit(&mut rng);
        prop_assert!(c.unitary().unitarity_error() < 1e-10);
    }
}
