use std::f64::consts::E;

use proptest::prelude::*;
use qwgan::pauli::PauliObservable;
use qwgan::qcore::random::{random_density, random_pure};
use qwgan::qcore::{herm_eig, kron, Complex, ComplexMatrix, DensityMatrix, PureState};
use qwgan::wasserstein::{
    dual_objective, gan_loss, qw_primal, xi_r_exact, xi_r_pauli_decompose, xi_r_relaxed,
    CouplingProblem, DualVariables, RegularizerMode, TermKind,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn qw(p: &DensityMatrix, q: &DensityMatrix) -> f64 {
    qw_primal(&CouplingProblem::new(p.clone(), q.clone()).unwrap())
        .unwrap()
        .value
}

/// `(I − SWAP)/2`, built entry by entry.
fn cost(d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d * d, d * d, |r, s| {
        let swap = if s == (r % d) * d + r / d { 0.5 } else { 0.0 };
        let id = if r == s { 0.5 } else { 0.0 };
        Complex::new(id - swap, 0.0)
    })
}

fn random_dv(qubits: usize, scale: f64, lambda: f64, rng: &mut ChaCha8Rng) -> DualVariables {
    let k = 1 << (2 * qubits);
    let alpha: Vec<f64> = (0..k).map(|_| rng.gen_range(-scale..scale)).collect();
    let beta: Vec<f64> = (0..k).map(|_| rng.gen_range(-scale..scale)).collect();
    DualVariables::from_coefficients(qubits, &alpha, &beta, lambda).unwrap()
}

fn plus() -> PureState {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    PureState::new(vec![Complex::new(h, 0.0), Complex::new(h, 0.0)]).unwrap()
}

#[test]
fn primal_examples() {
    let e0 = DensityMatrix::basis(2, 0).unwrap();
    let e1 = DensityMatrix::basis(2, 1).unwrap();
    assert!((qw(&e0, &e1) - 0.5).abs() < 1e-5);
    assert!((qw(&e0, &plus().to_density()) - 0.25).abs() < 1e-5);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for d in [2, 4] {
        let p = random_density(d, d, &mut rng);
        let sol = qw_primal(&CouplingProblem::new(p.clone(), p.clone()).unwrap()).unwrap();
        assert!(sol.value.abs() < 1e-5, "{}", sol.value);
        assert!(sol.marginal_residual < 1e-6);
    }
}

#[test]
fn coupling_has_requested_marginals() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let p = random_density(2, 2, &mut rng);
    let q = random_density(2, 1, &mut rng);
    let sol = qw_primal(&CouplingProblem::new(p.clone(), q.clone()).unwrap()).unwrap();
    let pi = sol.coupling.matrix();
    let mut tr_y = ComplexMatrix::zeros(2, 2);
    let mut tr_x = ComplexMatrix::zeros(2, 2);
    for a in 0..2 {
        for b in 0..2 {
            for k in 0..2 {
                tr_y[(a, b)] += pi[(a * 2 + k, b * 2 + k)];
                tr_x[(a, b)] += pi[(k * 2 + a, k * 2 + b)];
            }
        }
    }
    assert!((&tr_y - p.matrix()).max_abs() < 1e-6);
    assert!((&tr_x - q.matrix()).max_abs() < 1e-6);
    assert!((pi.trace_product(&cost(2)).re - sol.value).abs() < 1e-9);
    assert!(herm_eig(pi).unwrap().min() > -1e-8);
}

#[test]
fn dual_objective_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let p = random_density(2, 2, &mut rng);
    let q = random_density(2, 2, &mut rng);
    let zero = DualVariables::zeros(1, 1.0).unwrap();
    let obj = dual_objective(&p, &q, &zero, true).unwrap();
    assert_eq!(obj.value, 0.0);
    assert!(obj.feasibility.unwrap().feasible);

    let w = qw(&p, &q);
    for _ in 0..20 {
        let dv = random_dv(1, 0.5, 1.0, &mut rng);
        let min = herm_eig(&dv.slack()).unwrap().min();
        let feasible = dv.shift_phi(-min);
        let o = dual_objective(&p, &q, &feasible, true).unwrap();
        assert!(o.feasibility.unwrap().feasible);
        assert!(o.value <= w + 1e-6, "{} > {w}", o.value);
    }
}

#[test]
fn exact_regularizer_examples() {
    let big = DualVariables::zeros(1, 1e4).unwrap();
    let xi = xi_r_exact(&big).unwrap().scale_real(E / 1e4);
    assert!((&xi - &ComplexMatrix::identity(4)).max_abs() < 2e-4);

    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for i in 0..100 {
        let dv = random_dv(1 + i % 2, 1.0, rng.gen_range(0.2..5.0), &mut rng);
        let xi = xi_r_exact(&dv).unwrap();
        assert!(xi.is_hermitian(1e-10));
        let eig = herm_eig(&xi).unwrap();
        assert!(eig.min() > -1e-12 * eig.max());
    }
}

#[test]
fn relaxed_regularizer_examples() {
    let lambda = 0.7f64;
    let zero = DualVariables::zeros(1, lambda).unwrap();
    let mut want = ComplexMatrix::identity(4);
    want.add_scaled(Complex::new((-1.0 / lambda).exp() - 1.0, 0.0), &cost(2));
    assert!((&xi_r_relaxed(&zero).unwrap() - &want).max_abs() < 1e-12);

    let id = |c: f64| PauliObservable::new(1, vec![(c, "I".parse().unwrap())]).unwrap();
    let commuting = DualVariables::new(id(0.3), id(-0.2), lambda).unwrap();
    let exact = xi_r_exact(&commuting).unwrap().scale_real(E / lambda);
    assert!((&xi_r_relaxed(&commuting).unwrap() - &exact).max_abs() < 1e-9);

    let mut rng = ChaCha8Rng::seed_from_u64(25);
    for _ in 0..20 {
        let dv = random_dv(1, 0.1, 10.0, &mut rng);
        let exact = xi_r_exact(&dv).unwrap().scale_real(E / 10.0);
        assert!((&xi_r_relaxed(&dv).unwrap() - &exact).frobenius_norm() <= 1e-3);
    }
}

#[test]
fn relaxed_error_is_third_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    let base = random_dv(1, 1.0, 1.0, &mut rng);
    let err = |s: f64| {
        let dv = base.with_lambda(1.0 / s).unwrap();
        let exact = xi_r_exact(&dv).unwrap().scale_real(E * s);
        (&xi_r_relaxed(&dv).unwrap() - &exact).frobenius_norm()
    };
    let ratio = err(0.02) / err(0.01);
    assert!((ratio - 8.0).abs() < 0.5, "error ratio {ratio}");
}

#[test]
fn decomposition_of_zero_duals_has_two_terms() {
    for lambda in [0.3f64, 1.0, 4.0] {
        let form = xi_r_pauli_decompose(&DualVariables::zeros(1, lambda).unwrap(), 6).unwrap();
        let shrink = (-1.0 / lambda).exp() - 1.0;
        let a = (lambda / E) * (1.0 + shrink / 2.0);
        let b = -(lambda / E) * shrink / 2.0;
        assert_eq!(form.terms.len(), 2);
        for t in &form.terms {
            assert!(t.string.is_identity());
            let want = if t.kind == TermKind::Plain { a } else { b };
            assert!((t.coefficient - want).abs() < 1e-14);
        }
        assert_eq!(form.truncation_bound, 0.0);
    }
}

#[test]
fn decomposed_terms_are_hermitian() {
    let mut rng = ChaCha8Rng::seed_from_u64(27);
    let dv = random_dv(2, 0.2, 1.0, &mut rng);
    let form = xi_r_pauli_decompose(&dv, 4).unwrap();
    assert!(form.terms.iter().all(|t| t.string.qubits() == 4));
    assert!(form.dense().is_hermitian(1e-12));
}

#[test]
fn loss_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(28);
    let lambda = 1.5f64;
    let zero = DualVariables::zeros(1, lambda).unwrap();
    let p = random_density(2, 2, &mut rng);
    let q = random_density(2, 2, &mut rng);
    let pc = kron(p.matrix(), q.matrix()).trace_product(&cost(2)).re;
    let want = -(lambda / E) * (1.0 + ((-1.0 / lambda).exp() - 1.0) * pc);
    assert!((gan_loss(&p, &q, &zero, RegularizerMode::Exact).unwrap() - want).abs() < 1e-12);

    let v = random_pure(2, &mut rng).to_density();
    assert!((gan_loss(&v, &v, &zero, RegularizerMode::Exact).unwrap() + lambda / E).abs() < 1e-12);
}

/// Records triples with `qW(P,R) > qW(P,Q) + qW(Q,R)`; the semimetric makes no promise here.
#[test]
fn triangle_inequality_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let mut violations = Vec::new();
    for _ in 0..40 {
        let s: Vec<DensityMatrix> = (0..3)
            .map(|_| random_pure(2, &mut rng).to_density())
            .collect();
        let (pq, qr, pr) = (qw(&s[0], &s[1]), qw(&s[1], &s[2]), qw(&s[0], &s[2]));
        if pr > pq + qr + 1e-6 {
            violations.push(pr - pq - qr);
        }
    }
    println!(
        "triangle violations among 40 pure triples: {}",
        violations.len()
    );
    if let Some(m) = violations.iter().cloned().reduce(f64::max) {
        println!("largest excess {m:.4}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn loss_modes_agree_for_small_duals(seed in any::<u64>(), qubits in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = 1 << qubits;
        let dv = random_dv(qubits, 0.05, 10.0, &mut rng);
        let p = random_density(d, d, &mut rng);
        let q = random_density(d, 1, &mut rng);
        let exact = gan_loss(&p, &q, &dv, RegularizerMode::Exact).unwrap();
        let relaxed = gan_loss(&p, &q, &dv, RegularizerMode::Relaxed).unwrap();
        let decomposed = gan_loss(&p, &q, &dv, RegularizerMode::PauliDecomposed { order: 8 }).unwrap();
        prop_assert!((exact - relaxed).abs() < 1e-3);
        prop_assert!((relaxed - decomposed).abs() < 1e-9);
    }

    #[test]
    fn loss_is_at_most_the_unregularized_dual(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dv = random_dv(1, 1.0, 0.5, &mut rng);
        let p = random_density(2, 2, &mut rng);
        let q = random_density(2, 2, &mut rng);
        let loss = gan_loss(&p, &q, &dv, RegularizerMode::Exact).unwrap();
        let dual = dual_objective(&p, &q, &dv, false).unwrap().value;
        prop_assert!(loss < dual);
    }
}
