//! The quantum Wasserstein semimetric with cost `C = (I − SWAP)/2`: primal
//! coupling program, dual objective, entropic regularizer, and the GAN loss.

mod dual_solver;
mod primal;
mod regularizer;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use dual_solver::{make_feasible, maximize_regularized_dual, DualSolution, DualSolveOptions};
pub use primal::{qw_primal, CouplingProblem, PrimalSolution, ProjectionMethod};
pub use regularizer::{
    xi_r_exact, xi_r_pauli_decompose, xi_r_relaxed, xi_r_zero_dual, Regularizer, RegularizerForm,
    RegularizerTerm, TermKind,
};

use crate::error::{Error, Result};
use crate::pauli::{PauliObservable, PauliString};
use crate::qcore::{cost_matrix, herm_eig, kron, ComplexMatrix, DensityMatrix, PureState};

/// Default Taylor order for the Pauli-decomposed regularizer.
pub const DEFAULT_TAYLOR_ORDER: usize = 8;

/// Feasibility tolerance on the smallest eigenvalue of `C − I⊗ψ + φ⊗I`.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// How the regularizing Hermitian `ξ_R` is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RegularizerMode {
    /// Dense exponential of `(−C − φ⊗I + I⊗ψ)/λ`.
    #[default]
    Exact,
    /// Symmetric splitting `e^{−C/2λ} (e^{−φ/λ} ⊗ e^{ψ/λ}) e^{−C/2λ}`.
    Relaxed,
    /// Truncated Taylor expansion of the relaxed form in the `{Σ, SWAP·Σ}` basis.
    PauliDecomposed { order: usize },
}

impl fmt::Display for RegularizerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegularizerMode::Exact => write!(f, "exact"),
            RegularizerMode::Relaxed => write!(f, "relaxed"),
            RegularizerMode::PauliDecomposed { order } => write!(f, "pauli_decomposed:{order}"),
        }
    }
}

impl FromStr for RegularizerMode {
    type Err = Error;

    /// Accepts `exact`, `relaxed`, `pauli_decomposed`, or `pauli_decomposed:K`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "exact" => Ok(Self::Exact),
            "relaxed" => Ok(Self::Relaxed),
            "pauli_decomposed" => Ok(Self::PauliDecomposed {
                order: DEFAULT_TAYLOR_ORDER,
            }),
            other => match other.strip_prefix("pauli_decomposed:") {
                Some(k) => {
                    let order = k
                        .parse()
                        .map_err(|_| Error::Parse(format!("invalid Taylor order \"{k}\"")))?;
                    Ok(Self::PauliDecomposed { order })
                }
                None => Err(Error::Parse(format!(
                    "unknown regularizer mode \"{other}\""
                ))),
            },
        }
    }
}

/// Discriminator observables `φ` (on `X`) and `ψ` (on `Y`) with regularization weight `λ`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualVariables {
    phi: PauliObservable,
    psi: PauliObservable,
    lambda: f64,
}

impl DualVariables {
    pub fn new(phi: PauliObservable, psi: PauliObservable, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        if phi.qubits() != psi.qubits() {
            return Err(Error::DimensionMismatch {
                expected: phi.qubits(),
                found: psi.qubits(),
            });
        }
        Ok(Self { phi, psi, lambda })
    }

    /// Full Pauli basis on both sides with all coefficients zero.
    pub fn zeros(qubits: usize, lambda: f64) -> Result<Self> {
        let n = 1usize << (2 * qubits);
        Self::from_coefficients(qubits, &vec![0.0; n], &vec![0.0; n], lambda)
    }

    /// Full Pauli basis with the given `α` and `β`.
    pub fn from_coefficients(
        qubits: usize,
        alpha: &[f64],
        beta: &[f64],
        lambda: f64,
    ) -> Result<Self> {
        Self::new(
            PauliObservable::from_basis_coefficients(qubits, alpha)?,
            PauliObservable::from_basis_coefficients(qubits, beta)?,
            lambda,
        )
    }

    pub fn phi(&self) -> &PauliObservable {
        &self.phi
    }

    pub fn psi(&self) -> &PauliObservable {
        &self.psi
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn qubits(&self) -> usize {
        self.phi.qubits()
    }

    pub fn dim(&self) -> usize {
        self.phi.dim()
    }

    pub fn alpha(&self) -> Vec<f64> {
        self.phi.coefficients()
    }

    pub fn beta(&self) -> Vec<f64> {
        self.psi.coefficients()
    }

    pub fn set_alpha(&mut self, alpha: &[f64]) -> Result<()> {
        self.phi.set_coefficients(alpha)
    }

    pub fn set_beta(&mut self, beta: &[f64]) -> Result<()> {
        self.psi.set_coefficients(beta)
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.phi.clone(), self.psi.clone(), lambda)
    }

    /// `φ + c·I`.
    pub fn shift_phi(&self, c: f64) -> Self {
        let mut terms = self.phi.terms().to_vec();
        terms.push((c, PauliString::identity(self.qubits())));
        let phi = PauliObservable::new(self.qubits(), terms)
            .expect("same qubit count")
            .simplified();
        let phi = match phi.is_empty() {
            true => PauliObservable::zero(self.qubits()),
            false => phi,
        };
        Self {
            phi,
            psi: self.psi.clone(),
            lambda: self.lambda,
        }
    }

    /// `−C − φ⊗I + I⊗ψ`, the exponent of `ξ_R` before division by `λ`.
    pub fn exponent(&self) -> ComplexMatrix {
        let d = self.dim();
        let id = ComplexMatrix::identity(d);
        let mut x = -&cost_matrix(d);
        x -= &kron(&self.phi.dense(), &id);
        x += &kron(&id, &self.psi.dense());
        x
    }

    /// `C − I⊗ψ + φ⊗I`, which must be PSD for dual feasibility.
    pub fn slack(&self) -> ComplexMatrix {
        -&self.exponent()
    }
}

/// Value of the unregularized dual objective and, optionally, its feasibility.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualObjective {
    pub value: f64,
    pub feasibility: Option<Feasibility>,
}

/// Smallest eigenvalue of `C − I⊗ψ + φ⊗I` and whether it clears `−1e-9`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Feasibility {
    pub min_eigenvalue: f64,
    pub feasible: bool,
}

fn check_pair(p: &DensityMatrix, q: &DensityMatrix, d: usize) -> Result<()> {
    for s in [p, q] {
        if s.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: s.dim(),
            });
        }
    }
    Ok(())
}

/// `Tr(Qψ) − Tr(Pφ)`, with the PSD constraint checked when `feasible_check` is set.
pub fn dual_objective(
    p: &DensityMatrix,
    q: &DensityMatrix,
    dv: &DualVariables,
    feasible_check: bool,
) -> Result<DualObjective> {
    check_pair(p, q, dv.dim())?;
    let value = dv.psi.expectation(q)? - dv.phi.expectation(p)?;
    let feasibility = if feasible_check {
        let min_eigenvalue = herm_eig(&dv.slack())?.min();
        Some(Feasibility {
            min_eigenvalue,
            feasible: min_eigenvalue >= -FEASIBILITY_TOL,
        })
    } else {
        None
    };
    Ok(DualObjective { value, feasibility })
}

/// `0.5 (1 − |⟨u|v⟩|²)`, the transport cost between pure states.
pub fn qw_pure_closed_form(u: &PureState, v: &PureState) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: v.dim(),
        });
    }
    Ok((0.5 * (1.0 - u.inner(v).norm_sqr())).clamp(0.0, 0.5))
}

/// `Tr(Qψ) − Tr(Pφ) − Tr((P⊗Q) ξ_R)` with `ξ_R` evaluated per `mode`.
pub fn gan_loss(
    p: &DensityMatrix,
    q: &DensityMatrix,
    dv: &DualVariables,
    mode: RegularizerMode,
) -> Result<f64> {
    check_pair(p, q, dv.dim())?;
    let reg = Regularizer::new(dv, mode)?;
    Ok(loss_with(p.matrix(), q.matrix(), dv, &reg))
}

pub(crate) fn loss_with(
    p: &ComplexMatrix,
    q: &ComplexMatrix,
    dv: &DualVariables,
    reg: &Regularizer,
) -> f64 {
    dv.psi.expectation_matrix(q) - dv.phi.expectation_matrix(p) - reg.expectation(p, q)
}
