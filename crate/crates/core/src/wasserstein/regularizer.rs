use std::f64::consts::E;

use super::{DualVariables, RegularizerMode};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};
use crate::qcore::{
    cost_matrix, herm_eig, kron, partial_trace_op, swap_operator, Complex, ComplexMatrix,
    HermitianEigen, Subsystem, ONE, ZERO,
};

/// Whether a decomposed term is `Σ` or `SWAP·Σ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TermKind {
    Plain,
    Swapped,
}

/// One term `coefficient · Σ` or `coefficient · SWAP·Σ` on the doubled register.
#[derive(Clone, Debug, PartialEq)]
pub struct RegularizerTerm {
    pub coefficient: f64,
    pub kind: TermKind,
    pub string: PauliString,
}

/// Explicit representation of `ξ_R`; terms are populated for the decomposed mode.
///
/// Coefficients already include the `λ/e` prefactor. `truncation_bound` is
/// the spectral-norm bound on the distance to the relaxed form.
#[derive(Clone, Debug)]
pub struct RegularizerForm {
    pub mode: RegularizerMode,
    pub order: usize,
    pub lambda: f64,
    pub terms: Vec<RegularizerTerm>,
    pub truncation_bound: f64,
}

impl RegularizerForm {
    fn half_qubits(&self) -> usize {
        self.terms.first().map_or(0, |t| t.string.qubits() / 2)
    }

    /// Dense `d² × d²` matrix `Σ c·Σ + Σ c·SWAP·Σ`.
    pub fn dense(&self) -> ComplexMatrix {
        let n = self.half_qubits();
        let d = 1usize << n;
        let swap = swap_operator(d);
        let mut plain = ComplexMatrix::zeros(d * d, d * d);
        let mut swapped = ComplexMatrix::zeros(d * d, d * d);
        for t in &self.terms {
            let m = t.string.matrix();
            match t.kind {
                TermKind::Plain => plain.add_scaled(Complex::new(t.coefficient, 0.0), &m),
                TermKind::Swapped => swapped.add_scaled(Complex::new(t.coefficient, 0.0), &m),
            }
        }
        &plain + &swap.matmul(&swapped)
    }

    /// `Tr((P⊗Q) ξ)` evaluated term by term.
    pub fn expectation(&self, p: &ComplexMatrix, q: &ComplexMatrix) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let (a, b) = t.string.split_half();
                let v = match t.kind {
                    TermKind::Plain => (a.trace_with(p) * b.trace_with(q)).re,
                    TermKind::Swapped => p.trace_product(&b.left_mul(&a.right_mul(q))).re,
                };
                t.coefficient * v
            })
            .sum()
    }

    /// `W` with `Tr((M⊗Q) ξ) = Tr(M W)` for all `M`.
    pub fn observable_x(&self, q: &ComplexMatrix) -> ComplexMatrix {
        let d = q.rows();
        let mut w = ComplexMatrix::zeros(d, d);
        for t in &self.terms {
            let (a, b) = t.string.split_half();
            let c = Complex::new(t.coefficient, 0.0);
            match t.kind {
                TermKind::Plain => w.add_scaled(c * b.trace_with(q), &a.matrix()),
                TermKind::Swapped => w.add_scaled(c, &b.left_mul(&a.right_mul(q))),
            }
        }
        w
    }

    /// `W` with `Tr((P⊗M) ξ) = Tr(M W)` for all `M`.
    pub fn observable_y(&self, p: &ComplexMatrix) -> ComplexMatrix {
        let d = p.rows();
        let mut w = ComplexMatrix::zeros(d, d);
        for t in &self.terms {
            let (a, b) = t.string.split_half();
            let c = Complex::new(t.coefficient, 0.0);
            match t.kind {
                TermKind::Plain => w.add_scaled(c * a.trace_with(p), &b.matrix()),
                TermKind::Swapped => w.add_scaled(c, &a.left_mul(&b.right_mul(p))),
            }
        }
        w
    }
}

/// `ξ_R = (λ/e) exp((−C − φ⊗I + I⊗ψ)/λ)`.
pub fn xi_r_exact(dv: &DualVariables) -> Result<ComplexMatrix> {
    Ok(exact_parts(dv)?.1)
}

/// `e^{−C/2λ} (e^{−φ/λ} ⊗ e^{ψ/λ}) e^{−C/2λ}`, without the `λ/e` prefactor.
pub fn xi_r_relaxed(dv: &DualVariables) -> Result<ComplexMatrix> {
    let parts = RelaxedParts::new(dv)?;
    Ok(parts.dense_unscaled())
}

/// Taylor expansion of the relaxed regularizer in the `{Σ, SWAP·Σ}` basis.
pub fn xi_r_pauli_decompose(dv: &DualVariables, order: usize) -> Result<RegularizerForm> {
    if order < 1 {
        return Err(Error::InvalidArgument(
            "Taylor order must be at least 1".into(),
        ));
    }
    let n = dv.qubits();
    let lambda = dv.lambda();
    let x = PauliPoly::from_observable(n, dv.phi().terms(), -1.0 / lambda);
    let y = PauliPoly::from_observable(n, dv.psi().terms(), 1.0 / lambda);

    let x_pows = x.scaled_powers(order);
    let y_pows = y.scaled_powers(order);
    // y_tail[a] = Σ_{b ≤ K−a} Y^b / b!
    let y_tail: Vec<Vec<Complex>> = (0..=order)
        .map(|a| {
            let mut acc = vec![ZERO; y.coeffs.len()];
            for p in &y_pows[..=order - a] {
                for (s, &v) in acc.iter_mut().zip(&p.coeffs) {
                    *s += v;
                }
            }
            acc
        })
        .collect();

    let m = x.coeffs.len();
    let mut t = vec![ZERO; m * m];
    for (a, xp) in x_pows.iter().enumerate() {
        for (i, &xi) in xp.coeffs.iter().enumerate() {
            if xi == ZERO {
                continue;
            }
            for (j, &yj) in y_tail[a].iter().enumerate() {
                t[i * m + j] += xi * yj;
            }
        }
    }

    let (ca, cb) = splitting_coefficients(lambda);
    let prefactor = lambda / E;
    let mut terms = Vec::new();
    for i in 0..m {
        for j in 0..m {
            let direct = t[i * m + j].re;
            let mirrored = t[j * m + i].re;
            let plain = prefactor * (ca * ca * direct + cb * cb * mirrored);
            let swapped = prefactor * ca * cb * (direct + mirrored);
            let string = PauliString::from_index(n, i).tensor(&PauliString::from_index(n, j));
            if plain != 0.0 {
                terms.push(RegularizerTerm {
                    coefficient: plain,
                    kind: TermKind::Plain,
                    string: string.clone(),
                });
            }
            if swapped != 0.0 {
                terms.push(RegularizerTerm {
                    coefficient: swapped,
                    kind: TermKind::Swapped,
                    string,
                });
            }
        }
    }
    if terms.is_empty() {
        terms.push(RegularizerTerm {
            coefficient: 0.0,
            kind: TermKind::Plain,
            string: PauliString::identity(2 * n),
        });
    }

    let norm = exponent_spectral_norm(dv)?;
    let k1 = order as f64 + 1.0;
    let log_bound = k1 * norm.ln() + norm - ln_factorial(order + 1);
    let truncation_bound = if norm == 0.0 {
        0.0
    } else {
        prefactor * log_bound.exp()
    };

    Ok(RegularizerForm {
        mode: RegularizerMode::PauliDecomposed { order },
        order,
        lambda,
        terms,
        truncation_bound,
    })
}

fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// `‖(−φ⊗I + I⊗ψ)/λ‖₂` from the extreme eigenvalues of `φ` and `ψ`.
fn exponent_spectral_norm(dv: &DualVariables) -> Result<f64> {
    let phi = herm_eig(&dv.phi().dense())?;
    let psi = herm_eig(&dv.psi().dense())?;
    let hi = psi.max() - phi.min();
    let lo = psi.min() - phi.max();
    Ok(hi.abs().max(lo.abs()) / dv.lambda())
}

/// `(a, b)` with `exp(−C/2λ) = a·I + b·SWAP`.
fn splitting_coefficients(lambda: f64) -> (f64, f64) {
    let c = (-1.0 / (2.0 * lambda)).exp_m1();
    (1.0 + c / 2.0, -c / 2.0)
}

/// Dense coefficient vector over the `4^n` Pauli strings.
struct PauliPoly {
    qubits: usize,
    coeffs: Vec<Complex>,
}

impl PauliPoly {
    fn identity(qubits: usize) -> Self {
        let mut coeffs = vec![ZERO; 1 << (2 * qubits)];
        coeffs[0] = ONE;
        Self { qubits, coeffs }
    }

    fn from_observable(qubits: usize, terms: &[(f64, PauliString)], scale: f64) -> Self {
        let mut coeffs = vec![ZERO; 1 << (2 * qubits)];
        for (c, s) in terms {
            coeffs[s.index()] += Complex::new(c * scale, 0.0);
        }
        Self { qubits, coeffs }
    }

    fn mul(&self, other: &PauliPoly) -> PauliPoly {
        let n = self.qubits;
        let mut out = vec![ZERO; self.coeffs.len()];
        let lhs: Vec<(usize, Complex)> = nonzero(&self.coeffs);
        let rhs: Vec<(usize, Complex)> = nonzero(&other.coeffs);
        for &(i, a) in &lhs {
            for &(j, b) in &rhs {
                let (phase, k) = index_product(n, i, j);
                out[k] += a * b * phase;
            }
        }
        PauliPoly {
            qubits: n,
            coeffs: out,
        }
    }

    /// `[I, X, X²/2!, …, X^K/K!]`.
    fn scaled_powers(&self, order: usize) -> Vec<PauliPoly> {
        let mut out = vec![PauliPoly::identity(self.qubits)];
        for k in 1..=order {
            let mut next = out[k - 1].mul(self);
            for c in &mut next.coeffs {
                *c /= k as f64;
            }
            out.push(next);
        }
        out
    }
}

fn nonzero(v: &[Complex]) -> Vec<(usize, Complex)> {
    v.iter()
        .enumerate()
        .filter(|(_, c)| **c != ZERO)
        .map(|(i, &c)| (i, c))
        .collect()
}

/// Product of Pauli strings given by base-4 indices.
fn index_product(n: usize, mut i: usize, mut j: usize) -> (Complex, usize) {
    let mut phase = ONE;
    let mut k = 0usize;
    let mut place = 1usize;
    for _ in 0..n {
        let (p, l) = Pauli::ALL[i % 4].product(Pauli::ALL[j % 4]);
        phase *= p;
        k += l.index() * place;
        place *= 4;
        i /= 4;
        j /= 4;
    }
    (phase, k)
}

fn exact_parts(dv: &DualVariables) -> Result<(HermitianEigen, ComplexMatrix)> {
    let lambda = dv.lambda();
    let eig = herm_eig(&dv.exponent().scale_real(1.0 / lambda))?;
    let xi = eig.map(f64::exp).scale_real(lambda / E);
    Ok((eig, xi))
}

struct RelaxedParts {
    a: f64,
    b: f64,
    eig_phi: HermitianEigen,
    eig_psi: HermitianEigen,
    e_phi: ComplexMatrix,
    e_psi: ComplexMatrix,
}

impl RelaxedParts {
    fn new(dv: &DualVariables) -> Result<Self> {
        let lambda = dv.lambda();
        let (a, b) = splitting_coefficients(lambda);
        let eig_phi = herm_eig(&dv.phi().dense().scale_real(-1.0 / lambda))?;
        let eig_psi = herm_eig(&dv.psi().dense().scale_real(1.0 / lambda))?;
        let e_phi = eig_phi.map(f64::exp);
        let e_psi = eig_psi.map(f64::exp);
        Ok(Self {
            a,
            b,
            eig_phi,
            eig_psi,
            e_phi,
            e_psi,
        })
    }

    fn dense_unscaled(&self) -> ComplexMatrix {
        let d = self.e_phi.rows();
        let mut m = swap_operator(d).scale_real(self.b);
        m += &ComplexMatrix::identity(d * d).scale_real(self.a);
        m.matmul(&kron(&self.e_phi, &self.e_psi)).matmul(&m)
    }

    /// `Tr((P⊗Q) ξ') · e/λ`.
    fn expectation_unscaled(&self, p: &ComplexMatrix, q: &ComplexMatrix) -> f64 {
        let (a, b) = (self.a, self.b);
        let p_phi = p.trace_product(&self.e_phi).re;
        let q_psi = q.trace_product(&self.e_psi).re;
        let p_psi = p.trace_product(&self.e_psi).re;
        let q_phi = q.trace_product(&self.e_phi).re;
        let cross = p
            .matmul(&self.e_psi)
            .trace_product(&q.matmul(&self.e_phi))
            .re;
        a * a * p_phi * q_psi + 2.0 * a * b * cross + b * b * p_psi * q_phi
    }

    fn observable_x_unscaled(&self, q: &ComplexMatrix) -> ComplexMatrix {
        let (a, b) = (self.a, self.b);
        let mut w = self
            .e_phi
            .scale_real(a * a * q.trace_product(&self.e_psi).re);
        let sandwich = self.e_psi.matmul(q).matmul(&self.e_phi);
        w.add_scaled(Complex::new(a * b, 0.0), &sandwich);
        w.add_scaled(Complex::new(a * b, 0.0), &sandwich.adjoint());
        w.add_scaled(
            Complex::new(b * b * q.trace_product(&self.e_phi).re, 0.0),
            &self.e_psi,
        );
        w
    }

    fn observable_y_unscaled(&self, p: &ComplexMatrix) -> ComplexMatrix {
        let (a, b) = (self.a, self.b);
        let mut w = self
            .e_psi
            .scale_real(a * a * p.trace_product(&self.e_phi).re);
        let sandwich = self.e_phi.matmul(p).matmul(&self.e_psi);
        w.add_scaled(Complex::new(a * b, 0.0), &sandwich);
        w.add_scaled(Complex::new(a * b, 0.0), &sandwich.adjoint());
        w.add_scaled(
            Complex::new(b * b * p.trace_product(&self.e_psi).re, 0.0),
            &self.e_phi,
        );
        w
    }
}

enum Kind {
    Exact {
        eig: HermitianEigen,
        xi: ComplexMatrix,
    },
    Relaxed(RelaxedParts),
    Decomposed(RegularizerForm),
}

/// Precomputed `ξ_R` for fixed dual variables, evaluated against product states.
pub struct Regularizer {
    mode: RegularizerMode,
    dv: DualVariables,
    kind: Kind,
}

impl Regularizer {
    pub fn new(dv: &DualVariables, mode: RegularizerMode) -> Result<Self> {
        let kind = match mode {
            RegularizerMode::Exact => {
                let (eig, xi) = exact_parts(dv)?;
                Kind::Exact { eig, xi }
            }
            RegularizerMode::Relaxed => Kind::Relaxed(RelaxedParts::new(dv)?),
            RegularizerMode::PauliDecomposed { order } => {
                Kind::Decomposed(xi_r_pauli_decompose(dv, order)?)
            }
        };
        Ok(Self {
            mode,
            dv: dv.clone(),
            kind,
        })
    }

    pub fn mode(&self) -> RegularizerMode {
        self.mode
    }

    pub fn dual_variables(&self) -> &DualVariables {
        &self.dv
    }

    fn scale(&self) -> f64 {
        self.dv.lambda() / E
    }

    /// Dense `ξ` including the `λ/e` prefactor.
    pub fn dense(&self) -> ComplexMatrix {
        match &self.kind {
            Kind::Exact { xi, .. } => xi.clone(),
            Kind::Relaxed(r) => r.dense_unscaled().scale_real(self.scale()),
            Kind::Decomposed(f) => f.dense(),
        }
    }

    /// The decomposed form, when this regularizer was built in that mode.
    pub fn form(&self) -> Option<&RegularizerForm> {
        match &self.kind {
            Kind::Decomposed(f) => Some(f),
            _ => None,
        }
    }

    /// `Tr((P⊗Q) ξ)`.
    pub fn expectation(&self, p: &ComplexMatrix, q: &ComplexMatrix) -> f64 {
        match &self.kind {
            Kind::Exact { .. } => p.trace_product(&self.observable_x(q)).re,
            Kind::Relaxed(r) => self.scale() * r.expectation_unscaled(p, q),
            Kind::Decomposed(f) => f.expectation(p, q),
        }
    }

    /// `W` with `Tr((M⊗Q) ξ) = Tr(M W)` for every operator `M` on `X`.
    pub fn observable_x(&self, q: &ComplexMatrix) -> ComplexMatrix {
        match &self.kind {
            Kind::Exact { xi, .. } => {
                let d = q.rows();
                let mut w = ComplexMatrix::zeros(d, d);
                for b in 0..d {
                    for a in 0..d {
                        let mut acc = ZERO;
                        for c in 0..d {
                            for e in 0..d {
                                acc += q[(c, e)] * xi[(b * d + e, a * d + c)];
                            }
                        }
                        w[(b, a)] = acc;
                    }
                }
                w.hermitian_part()
            }
            Kind::Relaxed(r) => r
                .observable_x_unscaled(q)
                .scale_real(self.scale())
                .hermitian_part(),
            Kind::Decomposed(f) => f.observable_x(q).hermitian_part(),
        }
    }

    /// `W` with `Tr((P⊗M) ξ) = Tr(M W)` for every operator `M` on `Y`.
    pub fn observable_y(&self, p: &ComplexMatrix) -> ComplexMatrix {
        match &self.kind {
            Kind::Exact { xi, .. } => {
                let d = p.rows();
                let mut w = ComplexMatrix::zeros(d, d);
                for e in 0..d {
                    for c in 0..d {
                        let mut acc = ZERO;
                        for a in 0..d {
                            for b in 0..d {
                                acc += p[(a, b)] * xi[(b * d + e, a * d + c)];
                            }
                        }
                        w[(e, c)] = acc;
                    }
                }
                w.hermitian_part()
            }
            Kind::Relaxed(r) => r
                .observable_y_unscaled(p)
                .scale_real(self.scale())
                .hermitian_part(),
            Kind::Decomposed(f) => f.observable_y(p).hermitian_part(),
        }
    }

    /// Matrices `(G_φ, G_ψ)` with `∂Tr((P⊗Q)ξ)/∂α_k = Tr(A_k G_φ)` and
    /// `∂Tr((P⊗Q)ξ)/∂β_l = Tr(B_l G_ψ)`, from the Fréchet derivative of the
    /// exponential. Not available in the decomposed mode.
    pub fn gradient_matrices(
        &self,
        p: &ComplexMatrix,
        q: &ComplexMatrix,
    ) -> Option<(ComplexMatrix, ComplexMatrix)> {
        let d = p.rows();
        match &self.kind {
            Kind::Exact { eig, .. } => {
                let dz = eig.exp_frechet(&kron(p, q));
                let g_phi = partial_trace_op(&dz, Subsystem::Y, (d, d))
                    .ok()?
                    .scale_real(-1.0 / E);
                let g_psi = partial_trace_op(&dz, Subsystem::X, (d, d))
                    .ok()?
                    .scale_real(1.0 / E);
                Some((g_phi.hermitian_part(), g_psi.hermitian_part()))
            }
            Kind::Relaxed(r) => {
                let (a, b) = (r.a, r.b);
                let pq = p.matmul(&r.e_psi).matmul(q);
                let mut g_e = p.scale_real(a * a * q.trace_product(&r.e_psi).re);
                g_e.add_scaled(Complex::new(a * b, 0.0), &pq);
                g_e.add_scaled(Complex::new(a * b, 0.0), &pq.adjoint());
                g_e.add_scaled(Complex::new(b * b * p.trace_product(&r.e_psi).re, 0.0), q);

                let qp = q.matmul(&r.e_phi).matmul(p);
                let mut g_f = q.scale_real(a * a * p.trace_product(&r.e_phi).re);
                g_f.add_scaled(Complex::new(a * b, 0.0), &qp);
                g_f.add_scaled(Complex::new(a * b, 0.0), &qp.adjoint());
                g_f.add_scaled(Complex::new(b * b * q.trace_product(&r.e_phi).re, 0.0), p);

                let g_phi = r
                    .eig_phi
                    .exp_frechet(&g_e.hermitian_part())
                    .scale_real(-1.0 / E);
                let g_psi = r
                    .eig_psi
                    .exp_frechet(&g_f.hermitian_part())
                    .scale_real(1.0 / E);
                Some((g_phi.hermitian_part(), g_psi.hermitian_part()))
            }
            Kind::Decomposed(_) => None,
        }
    }

    /// `(∂Tr((P⊗Q)ξ)/∂α_k, ∂Tr((P⊗Q)ξ)/∂β_l)` over the dual variables' terms.
    ///
    /// The decomposed mode has no closed-form derivative and falls back to
    /// central differences with step `1e-5`.
    pub fn coefficient_gradients(
        &self,
        p: &ComplexMatrix,
        q: &ComplexMatrix,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        if let Some((g_phi, g_psi)) = self.gradient_matrices(p, q) {
            let ga = self
                .dv
                .phi()
                .terms()
                .iter()
                .map(|(_, s)| s.trace_with(&g_phi).re)
                .collect();
            let gb = self
                .dv
                .psi()
                .terms()
                .iter()
                .map(|(_, s)| s.trace_with(&g_psi).re)
                .collect();
            return Ok((ga, gb));
        }
        let h = 1e-5;
        let eval = |dv: &DualVariables| -> Result<f64> {
            Ok(Regularizer::new(dv, self.mode)?.expectation(p, q))
        };
        let alpha = self.dv.alpha();
        let beta = self.dv.beta();
        let mut ga = Vec::with_capacity(alpha.len());
        for k in 0..alpha.len() {
            let mut plus = self.dv.clone();
            let mut minus = self.dv.clone();
            let mut ap = alpha.clone();
            let mut am = alpha.clone();
            ap[k] += h;
            am[k] -= h;
            plus.set_alpha(&ap)?;
            minus.set_alpha(&am)?;
            ga.push((eval(&plus)? - eval(&minus)?) / (2.0 * h));
        }
        let mut gb = Vec::with_capacity(beta.len());
        for k in 0..beta.len() {
            let mut plus = self.dv.clone();
            let mut minus = self.dv.clone();
            let mut bp = beta.clone();
            let mut bm = beta.clone();
            bp[k] += h;
            bm[k] -= h;
            plus.set_beta(&bp)?;
            minus.set_beta(&bm)?;
            gb.push((eval(&plus)? - eval(&minus)?) / (2.0 * h));
        }
        Ok((ga, gb))
    }
}

/// `(λ/e)(I + (e^{−1/λ} − 1) C)`, the regularizer at `φ = ψ = 0`.
pub fn xi_r_zero_dual(d: usize, lambda: f64) -> ComplexMatrix {
    let mut m = cost_matrix(d).scale_real((-1.0 / lambda).exp_m1());
    m += &ComplexMatrix::identity(d * d);
    m.scale_real(lambda / E)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliObservable;
    use crate::qcore::random::{random_density, random_hermitian};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_dv(n: usize, scale: f64, lambda: f64, rng: &mut ChaCha8Rng) -> DualVariables {
        let d = 1 << n;
        let phi = PauliObservable::decompose(&random_hermitian(d, scale, rng)).unwrap();
        let psi = PauliObservable::decompose(&random_hermitian(d, scale, rng)).unwrap();
        DualVariables::new(phi, psi, lambda).unwrap()
    }

    #[test]
    fn zero_duals_match_closed_form() {
        for lambda in [0.3, 2.0, 10.0] {
            let dv = DualVariables::zeros(2, lambda).unwrap();
            let want = xi_r_zero_dual(4, lambda);
            assert!((&xi_r_exact(&dv).unwrap() - &want).max_abs() < 1e-12);
            let relaxed = xi_r_relaxed(&dv).unwrap().scale_real(lambda / E);
            assert!((&relaxed - &want).max_abs() < 1e-12);
            let form = xi_r_pauli_decompose(&dv, 4).unwrap();
            assert_eq!(form.terms.len(), 2);
            assert!((&form.dense() - &want).max_abs() < 1e-12);
        }
    }

    #[test]
    fn observables_reproduce_expectation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for mode in [
            RegularizerMode::Exact,
            RegularizerMode::Relaxed,
            RegularizerMode::PauliDecomposed { order: 5 },
        ] {
            let dv = random_dv(2, 0.4, 1.5, &mut rng);
            let reg = Regularizer::new(&dv, mode).unwrap();
            let p = random_density(4, 4, &mut rng);
            let q = random_density(4, 2, &mut rng);
            let dense = reg.dense();
            let direct = kron(p.matrix(), q.matrix()).trace_product(&dense).re;
            let via = reg.expectation(p.matrix(), q.matrix());
            assert!((direct - via).abs() < 1e-11, "{mode}: {direct} vs {via}");
            let wx = reg.observable_x(q.matrix());
            assert!((p.matrix().trace_product(&wx).re - direct).abs() < 1e-11);
            let wy = reg.observable_y(p.matrix());
            assert!((q.matrix().trace_product(&wy).re - direct).abs() < 1e-11);
        }
    }

    #[test]
    fn decomposition_within_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for order in [2, 4, 8] {
            let dv = random_dv(1, 0.5, 2.0, &mut rng);
            let form = xi_r_pauli_decompose(&dv, order).unwrap();
            let relaxed = xi_r_relaxed(&dv).unwrap().scale_real(dv.lambda() / E);
            let err = crate::qcore::spectral_norm(&(&form.dense() - &relaxed));
            assert!(
                err <= form.truncation_bound + 1e-14,
                "K={order}: {err} > {}",
                form.truncation_bound
            );
        }
        assert!(xi_r_pauli_decompose(&DualVariables::zeros(1, 1.0).unwrap(), 0).is_err());
    }
}
