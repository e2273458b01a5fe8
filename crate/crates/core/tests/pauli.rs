use proptest::prelude::*;
use qwgan::parallel::Execution;
use qwgan::pauli::{
    gate_derivative, gate_unitary, gate_vocabulary, trace_projections, Pauli, PauliObservable,
    PauliString, RotationGate,
};
use qwgan::qcore::random::random_hermitian;
use qwgan::qcore::{kron, Complex, ComplexMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn letter(l: Pauli) -> ComplexMatrix {
    let r = |v: &[f64]| ComplexMatrix::from_real(2, 2, v).unwrap();
    match l {
        Pauli::I => r(&[1.0, 0.0, 0.0, 1.0]),
        Pauli::X => r(&[0.0, 1.0, 1.0, 0.0]),
        Pauli::Y => ComplexMatrix::from_rows(&[
            vec![Complex::new(0.0, 0.0), Complex::new(0.0, -1.0)],
            vec![Complex::new(0.0, 1.0), Complex::new(0.0, 0.0)],
        ])
        .unwrap(),
        Pauli::Z => r(&[1.0, 0.0, 0.0, -1.0]),
    }
}

fn dense(word: &str) -> ComplexMatrix {
    word.chars()
        .map(|c| letter(Pauli::from_char(c).unwrap()))
        .fold(ComplexMatrix::identity(1), |acc, m| kron(&acc, &m))
}

#[test]
fn strings_are_trace_orthogonal() {
    let all = PauliString::all(2);
    assert_eq!(all.len(), 16);
    for a in &all {
        for b in &all {
            let t = a.matrix().matmul(&b.matrix()).trace();
            let want = if a == b { 4.0 } else { 0.0 };
            assert!((t - Complex::new(want, 0.0)).norm() < 1e-12, "{a} {b}");
        }
    }
}

#[test]
fn qubit_zero_is_the_leftmost_factor() {
    let s: PauliString = "XZ".parse().unwrap();
    assert!((&s.matrix() - &dense("XZ")).max_abs() < 1e-15);
    let single = PauliString::single(2, 0, Pauli::X).unwrap();
    assert_eq!(single.to_string(), "XI");
}

#[test]
fn letter_products_follow_the_algebra() {
    let (phase, p) = Pauli::X.product(Pauli::Y);
    assert_eq!(p, Pauli::Z);
    assert!((phase - Complex::new(0.0, 1.0)).norm() < 1e-15);
    let (phase, p) = Pauli::Y.product(Pauli::X);
    assert_eq!(p, Pauli::Z);
    assert!((phase - Complex::new(0.0, -1.0)).norm() < 1e-15);
}

#[test]
fn observable_parses_and_builds_dense_sum() {
    let obs: PauliObservable = "0.5*ZZI + -0.25*XIX".parse().unwrap();
    let mut want = dense("ZZI").scale_real(0.5);
    want.add_scaled(Complex::new(-0.25, 0.0), &dense("XIX"));
    assert!((&obs.dense() - &want).max_abs() < 1e-15);
    assert!("0.5*ZQ".parse::<PauliObservable>().is_err());
    assert!("0.5*ZZ + 1*X".parse::<PauliObservable>().is_err());
}

#[test]
fn rotation_about_x_by_pi() {
    let g = RotationGate::single(0, Pauli::X, std::f64::consts::PI).unwrap();
    let u = gate_unitary(&g, 1).unwrap();
    let want = letter(Pauli::X).scale(Complex::new(0.0, 1.0));
    assert!((&u - &want).max_abs() < 1e-15);
    let full = RotationGate::single(0, Pauli::Y, 2.0 * std::f64::consts::PI).unwrap();
    assert!((&gate_unitary(&full, 1).unwrap() + &ComplexMatrix::identity(2)).max_abs() < 1e-15);
}

#[test]
fn vocabulary_covers_all_local_axes() {
    let v = gate_vocabulary(3);
    assert_eq!(v.one_qubit.len(), 12);
    assert_eq!(v.two_qubit.len(), 48);
    assert!(v.one_qubit.iter().filter(|t| !t.is_trainable()).count() == 3);
}

#[test]
fn projections_agree_across_execution_modes() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let h = random_hermitian(16, 1.0, &mut rng);
    let basis = PauliString::all(4);
    let a = trace_projections(&h, &basis, Execution::Sequential);
    let b = trace_projections(&h, &basis, Execution::Parallel);
    assert_eq!(a, b);
    let back = PauliObservable::from_basis_coefficients(
        4,
        &a.iter().map(|t| t / 16.0).collect::<Vec<_>>(),
    )
    .unwrap();
    assert!((&back.dense() - &h).max_abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn strings_are_hermitian_involutions(qubits in 1usize..=4, index in any::<usize>()) {
        let s = PauliString::from_index(qubits, index % (1 << (2 * qubits)));
        let m = s.matrix();
        prop_assert!(m.is_hermitian(1e-15));
        prop_assert!((&m.matmul(&m) - &ComplexMatrix::identity(1 << qubits)).max_abs() < 1e-15);
        prop_assert_eq!(PauliString::from_index(qubits, s.index()), s);
    }

    #[test]
    fn string_product_matches_dense(qubits in 1usize..=3, a in any::<usize>(), b in any::<usize>()) {
        let n = 1 << (2 * qubits);
        let (sa, sb) = (PauliString::from_index(qubits, a % n), PauliString::from_index(qubits, b % n));
        let (phase, prod) = sa.product(&sb);
        let want = sa.matrix().matmul(&sb.matrix());
        prop_assert!((&prod.matrix().scale(phase) - &want).max_abs() < 1e-15);
        let commute = (&want - &sb.matrix().matmul(&sa.matrix())).max_abs() < 1e-15;
        prop_assert_eq!(sa.commutes_with(&sb), commute);
    }

    #[test]
    fn decomposition_round_trips(seed in any::<u64>(), qubits in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_hermitian(1 << qubits, 2.0, &mut rng);
        let obs = PauliObservable::decompose(&h).unwrap();
        prop_assert!((&obs.dense() - &h).max_abs() < 1e-12);
    }

    #[test]
    fn gates_are_unitary_with_matching_derivative(qubits in 1usize..=3, index in 1usize..64, angle in -10.0f64..10.0) {
        let n = 1 << (2 * qubits);
        let s = PauliString::from_index(qubits, 1 + (index - 1) % (n - 1));
        prop_assume!(s.weight() <= 2);
        let g = RotationGate::from_string(&s, angle).unwrap();
        let u = gate_unitary(&g, qubits).unwrap();
        prop_assert!(u.unitarity_error() < 1e-12);
        let h = 1e-6;
        let up = gate_unitary(&g.with_angle(angle + h), qubits).unwrap();
        let um = gate_unitary(&g.with_angle(angle - h), qubits).unwrap();
        let fd = (&up - &um).scale_real(0.5 / h);
        prop_assert!((&gate_derivative(&g, qubits).unwrap() - &fd).max_abs() < 1e-8);
        let closed = {
            let mut m = ComplexMatrix::identity(1 << qubits).scale_real((angle / 2.0).cos());
            m.add_scaled(Complex::new(0.0, (angle / 2.0).sin()), &s.matrix());
            m
        };
        prop_assert!((&u - &closed).max_abs() < 1e-12);
    }
}
