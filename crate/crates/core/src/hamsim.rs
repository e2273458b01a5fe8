//! Heisenberg-chain evolution, Suzuki product formulas and circuit compression
//! through the Choi state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::circuit::{Circuit, InitialState, Layout};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliObservable, PauliString, RotationGate};
use crate::qcore::{eigenvalues, mat_exp_i_herm, ComplexMatrix, DensityMatrix, PureState};
use crate::trainer::{train, RunHistory, TrainingConfig};

/// Unitarity tolerance for inputs of the Choi and error functions.
pub const UNITARY_TOL: f64 = 1e-9;

/// Nearest-neighbour coupling pattern of the chain.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Couples qubit `n − 1` back to qubit 0.
    #[default]
    Periodic,
    Open,
}

/// Heisenberg chain with a random field along `z`.
#[derive(Clone, Debug, PartialEq)]
pub struct HeisenbergSpec {
    pub qubits: usize,
    /// Bound `h` on the field strengths `h_j ∈ [−h, h]`.
    pub field: f64,
    pub time: f64,
    pub seed: u64,
    pub boundary: Boundary,
}

impl HeisenbergSpec {
    pub fn new(qubits: usize, field: f64, time: f64, seed: u64) -> Self {
        Self {
            qubits,
            field,
            time,
            seed,
            boundary: Boundary::Periodic,
        }
    }

    /// The field strengths, drawn uniformly from `[−h, h]`.
    pub fn fields(&self) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.qubits)
            .map(|_| {
                if self.field > 0.0 {
                    rng.gen_range(-self.field..=self.field)
                } else {
                    0.0
                }
            })
            .collect()
    }

    fn bonds(&self) -> Vec<(usize, usize)> {
        let n = self.qubits;
        let count = match self.boundary {
            Boundary::Periodic => n,
            Boundary::Open => n - 1,
        };
        (0..count).map(|j| (j, (j + 1) % n)).collect()
    }
}

/// `Σ_j (X_jX_{j+1} + Y_jY_{j+1} + Z_jZ_{j+1}) + Σ_j h_j Z_j`, with terms
/// ordered as all `XX`, all `YY`, all `ZZ`, then the field terms.
pub fn heisenberg_hamiltonian(spec: &HeisenbergSpec) -> Result<PauliObservable> {
    let n = spec.qubits;
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "a Heisenberg chain needs at least 2 qubits, got {n}"
        )));
    }
    if !(spec.field >= 0.0) || !spec.field.is_finite() || !spec.time.is_finite() {
        return Err(Error::InvalidArgument(
            "field bound and time must be finite, field non-negative".into(),
        ));
    }
    let mut terms = Vec::with_capacity(4 * n);
    for letter in [Pauli::X, Pauli::Y, Pauli::Z] {
        for (a, b) in spec.bonds() {
            terms.push((
                1.0,
                PauliString::with_letters(n, &[a, b], &[letter, letter])?,
            ));
        }
    }
    for (j, h) in spec.fields().into_iter().enumerate() {
        terms.push((h, PauliString::single(n, j, Pauli::Z)?));
    }
    PauliObservable::new(n, terms)
}

/// `e^{iĤt}`.
pub fn exact_evolution(spec: &HeisenbergSpec) -> Result<ComplexMatrix> {
    let h = heisenberg_hamiltonian(spec)?.dense();
    mat_exp_i_herm(&h, spec.time)
}

/// Step and gate counts of a product-formula circuit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrotterPlan {
    pub order: usize,
    pub epsilon: f64,
    pub terms: usize,
    pub time: f64,
    /// `⌈(Lt)^{1+1/2k} / ε^{1/2k}⌉`.
    pub steps: u64,
    /// `2L·5^{k−1}`.
    pub gates_per_step: u64,
    pub total_gates: u64,
    /// Pauli strings in the order they appear in each half of `S₂`.
    pub term_order: Vec<String>,
}

impl TrotterPlan {
    pub fn new(order: usize, terms: usize, time: f64, epsilon: f64) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidArgument(
                "product formula order must be at least 1".into(),
            ));
        }
        if !(epsilon > 0.0) || !(time >= 0.0) || terms == 0 {
            return Err(Error::InvalidArgument(
                "need epsilon > 0, time ≥ 0 and at least one term".into(),
            ));
        }
        let k = order as f64;
        let lt = terms as f64 * time;
        let steps = (lt.powf(1.0 + 1.0 / (2.0 * k)) / epsilon.powf(1.0 / (2.0 * k)))
            .ceil()
            .max(1.0) as u64;
        let gates_per_step = 2 * terms as u64 * 5u64.pow(order as u32 - 1);
        Ok(Self {
            order,
            epsilon,
            terms,
            time,
            steps,
            gates_per_step,
            total_gates: steps * gates_per_step,
            term_order: vec![],
        })
    }
}

/// `p_k = 1/(4 − 4^{1/(2k−1)})`, defined for `k ≥ 2`.
pub fn suzuki_coefficient(k: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::Domain(format!("p_k is defined for k ≥ 2, got {k}")));
    }
    Ok(1.0 / (4.0 - 4f64.powf(1.0 / (2.0 * k as f64 - 1.0))))
}

/// Exponent weights of one `S_{2k}(s)` step, as `(term, weight)` with the
/// factor `exp(i·weight·α_j H_j)`.
fn suzuki_sequence(order: usize, terms: usize, s: f64) -> Vec<(usize, f64)> {
    if order == 1 {
        let forward = (0..terms).map(|j| (j, s / 2.0));
        let backward = (0..terms).rev().map(|j| (j, s / 2.0));
        return forward.chain(backward).collect();
    }
    let p = suzuki_coefficient(order).expect("order ≥ 2");
    let outer = suzuki_sequence(order - 1, terms, p * s);
    let middle = suzuki_sequence(order - 1, terms, (1.0 - 4.0 * p) * s);
    let mut out = Vec::with_capacity(5 * outer.len());
    for _ in 0..2 {
        out.extend_from_slice(&outer);
    }
    out.extend_from_slice(&middle);
    for _ in 0..2 {
        out.extend_from_slice(&outer);
    }
    out
}

/// `[S_{2k}(it/r)]^r` as a circuit of Pauli rotations, with its plan.
///
/// Each factor `exp(i·w·α_j σ_j)` becomes a rotation with angle `2wα_j`.
/// The recursion uses a single middle factor, giving `2L·5^{k−1}` gates per step.
pub fn suzuki_circuit(
    spec: &HeisenbergSpec,
    order: usize,
    epsilon: f64,
) -> Result<(Circuit, TrotterPlan)> {
    let h = heisenberg_hamiltonian(spec)?;
    let mut plan = TrotterPlan::new(order, h.len(), spec.time, epsilon)?;
    plan.term_order = h.strings().iter().map(ToString::to_string).collect();
    let circuit = product_formula(&h, order, spec.time, plan.steps)?;
    Ok((circuit, plan))
}

/// `[S_{2k}(it/r)]^r` for an arbitrary Pauli Hamiltonian and step count.
pub fn product_formula(
    h: &PauliObservable,
    order: usize,
    time: f64,
    steps: u64,
) -> Result<Circuit> {
    if order == 0 || steps == 0 {
        return Err(Error::InvalidArgument(
            "order and steps must be positive".into(),
        ));
    }
    let n = h.qubits();
    let seq = suzuki_sequence(order, h.len(), time / steps as f64);
    let mut step = Vec::with_capacity(seq.len());
    for (j, w) in seq {
        let (alpha, s) = &h.terms()[j];
        step.push(RotationGate::from_string(s, 2.0 * w * alpha)?);
    }
    let mut gates = Vec::with_capacity(step.len() * steps as usize);
    for _ in 0..steps {
        gates.extend_from_slice(&step);
    }
    Circuit::new(n, gates)
}

/// The Choi state `(U ⊗ I)Φ` of an `n`-qubit unitary on `2n` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiState {
    pub qubits: usize,
    pub state: PureState,
}

impl ChoiState {
    pub fn density(&self) -> DensityMatrix {
        self.state.to_density()
    }
}

fn check_unitary(u: &ComplexMatrix) -> Result<usize> {
    let n = crate::qcore::qubit_count(u.rows())
        .filter(|_| u.is_square())
        .ok_or_else(|| {
            Error::InvalidShape(format!(
                "expected a 2^n square unitary, got {}x{}",
                u.rows(),
                u.cols()
            ))
        })?;
    let deviation = u.unitarity_error();
    if deviation > UNITARY_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(n)
}

/// `Ψ_U = Σ_i U e_i ⊗ e_i / √d`.
pub fn choi_state(u: &ComplexMatrix) -> Result<ChoiState> {
    let n = check_unitary(u)?;
    let norm = (u.rows() as f64).sqrt().recip();
    let amps = u.data().iter().map(|z| z * norm).collect();
    Ok(ChoiState {
        qubits: n,
        state: PureState::new(amps)?,
    })
}

fn check_pair(u0: &ComplexMatrix, u1: &ComplexMatrix) -> Result<()> {
    let n0 = check_unitary(u0)?;
    let n1 = check_unitary(u1)?;
    if n0 != n1 {
        return Err(Error::DimensionMismatch {
            expected: u0.rows(),
            found: u1.rows(),
        });
    }
    Ok(())
}

/// `|Tr(U0†U1)/d|²`, the fidelity of the two Choi states.
pub fn avg_output_fidelity(u0: &ComplexMatrix, u1: &ComplexMatrix) -> Result<f64> {
    check_pair(u0, u1)?;
    let d = u0.rows() as f64;
    Ok((u0.adjoint().trace_product(u1).norm() / d).powi(2).min(1.0))
}

/// `min_γ ‖U0 − e^{iγ}U1‖₂`.
///
/// With the eigenphases of `U0†U1` covered by a shortest arc of length `A`,
/// the minimum is `2 sin(A/4)`.
pub fn worst_case_error(u0: &ComplexMatrix, u1: &ComplexMatrix) -> Result<f64> {
    check_pair(u0, u1)?;
    let mut phases: Vec<f64> = eigenvalues(&u0.adjoint().matmul(u1))?
        .iter()
        .map(|z| z.arg())
        .collect();
    phases.sort_by(f64::total_cmp);
    let tau = std::f64::consts::TAU;
    let m = phases.len();
    let largest_gap = (0..m)
        .map(|i| match i + 1 < m {
            true => phases[i + 1] - phases[i],
            false => phases[0] + tau - phases[m - 1],
        })
        .fold(0.0, f64::max);
    let arc = (tau - largest_gap).max(0.0);
    Ok(2.0 * (arc / 4.0).sin())
}

/// Learns a circuit on `layout` whose Choi state matches that of `target`.
///
/// The generator is `(U₁ ⊗ I)Φ` on twice the layout's qubits with rank 1;
/// the remaining settings come from `config`. Returns the learned circuit on
/// the layout's own register.
pub fn compress_circuit(
    target: &ComplexMatrix,
    layout: &Layout,
    config: &TrainingConfig,
) -> Result<(Circuit, RunHistory)> {
    let n = check_unitary(target)?;
    if layout.qubits() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: layout.qubits(),
        });
    }
    let choi = choi_state(target)?.density();
    let mut cfg = config.clone();
    cfg.layout = layout.widen(2 * n)?;
    cfg.rank = 1;
    cfg.initial = InitialState::MaximallyEntangled;
    let history = train(&cfg, &choi)?;
    let learned = history.generator.circuits()[0].restrict(n)?;
    Ok((learned, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::spectral_norm;

    #[test]
    fn three_qubit_chain_has_twelve_terms() {
        let spec = HeisenbergSpec::new(3, 1.0, 3.0, 7);
        let h = heisenberg_hamiltonian(&spec).unwrap();
        assert_eq!(h.len(), 12);
        assert!(h.dense().hermiticity_error() < 1e-12);
        assert!(spec.fields().iter().all(|f| f.abs() <= 1.0));
        let zero = HeisenbergSpec::new(3, 0.0, 3.0, 7);
        let h0 = heisenberg_hamiltonian(&zero).unwrap();
        assert!(h0.terms()[9..].iter().all(|(c, _)| *c == 0.0));
        assert!(heisenberg_hamiltonian(&HeisenbergSpec::new(1, 1.0, 1.0, 0)).is_err());
    }

    #[test]
    fn single_term_formula_is_exact() {
        let h: PauliObservable = "0.7*XZ".parse().unwrap();
        let c = product_formula(&h, 1, 1.3, 1).unwrap();
        let want = mat_exp_i_herm(&h.dense(), 1.3).unwrap();
        assert!((&c.unitary() - &want).max_abs() < 1e-12);
    }

    #[test]
    fn product_formula_converges() {
        let spec = HeisenbergSpec::new(2, 1.0, 1.0, 3);
        let h = heisenberg_hamiltonian(&spec).unwrap();
        let exact = exact_evolution(&spec).unwrap();
        let mut last = f64::INFINITY;
        for r in [1, 2, 4, 8] {
            let u = product_formula(&h, 1, spec.time, r).unwrap().unitary();
            let err = spectral_norm(&(&u - &exact));
            assert!(err < last);
            last = err;
        }
    }

    #[test]
    fn choi_of_identity_is_maximally_entangled() {
        let choi = choi_state(&ComplexMatrix::identity(4)).unwrap();
        let phi = PureState::maximally_entangled(4);
        assert!((choi.state.inner(&phi).norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn phase_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = crate::qcore::random::random_unitary(4, &mut rng);
        let v = u.scale(crate::qcore::Complex::from_polar(1.0, 0.9));
        assert!((avg_output_fidelity(&u, &v).unwrap() - 1.0).abs() < 1e-12);
        assert!(worst_case_error(&u, &v).unwrap() < 1e-7);
        assert!(worst_case_error(&u, &u).unwrap() < 1e-7);
    }
}
