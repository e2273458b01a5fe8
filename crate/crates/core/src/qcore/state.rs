use super::linalg::{herm_eig, herm_eig_unchecked, mat_sqrt_psd};
use super::matrix::{
    kron, partial_trace_op, qubit_count, Complex, ComplexMatrix, Subsystem, ONE, ZERO,
};
use crate::error::{Error, Result};

/// Tolerance on `|ρ_ij − conj(ρ_ji)|` for density matrices.
pub const DENSITY_HERMITIAN_TOL: f64 = 1e-10;
/// Most negative eigenvalue accepted for a density matrix.
pub const DENSITY_EIGEN_TOL: f64 = 1e-9;
/// Tolerance on `|Tr ρ − 1|`.
pub const DENSITY_TRACE_TOL: f64 = 1e-9;
/// Tolerance on `|‖v‖ − 1|` for pure states.
pub const PURE_NORM_TOL: f64 = 1e-10;

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates `m` and stores its Hermitian part.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let rho = Self { matrix: m.clone() };
        rho.validate()?;
        Ok(Self {
            matrix: m.hermitian_part(),
        })
    }

    /// Wraps a matrix that is a density matrix by construction.
    pub(crate) fn from_trusted(m: ComplexMatrix) -> Self {
        debug_assert!(m.is_square());
        Self {
            matrix: m.hermitian_part(),
        }
    }

    /// Checks the density-matrix invariants.
    pub fn validate(&self) -> Result<()> {
        let m = &self.matrix;
        if !m.is_square() || m.rows() == 0 {
            return Err(Error::InvalidShape(format!(
                "density matrix must be square and non-empty, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        if !m.is_finite() {
            return Err(Error::NonFinite("density matrix entry".into()));
        }
        let deviation = m.hermiticity_error();
        if deviation > DENSITY_HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let tr = m.trace().re;
        if (tr - 1.0).abs() > DENSITY_TRACE_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let min = herm_eig_unchecked(&m.hermitian_part()).min();
        if min < -DENSITY_EIGEN_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    pub fn from_pure(v: &PureState) -> Self {
        Self {
            matrix: ComplexMatrix::outer(v.amplitudes()),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    /// The projector `e_i e_i†`.
    pub fn basis(dim: usize, i: usize) -> Result<Self> {
        Ok(Self::from_pure(&PureState::basis(dim, i)?))
    }

    /// Convex combination `Σ w_i ρ_i`.
    pub fn mixture(weights: &[f64], states: &[DensityMatrix]) -> Result<Self> {
        if weights.len() != states.len() || states.is_empty() {
            return Err(Error::InvalidArgument(
                "mixture needs one weight per state and at least one state".into(),
            ));
        }
        if weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::InvalidArgument(
                "mixture weights must be non-negative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > DENSITY_TRACE_TOL {
            return Err(Error::InvalidArgument(format!(
                "mixture weights sum to {total}"
            )));
        }
        let d = states[0].dim();
        let mut m = ComplexMatrix::zeros(d, d);
        for (w, s) in weights.iter().zip(states) {
            if s.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: s.dim(),
                });
            }
            m.add_scaled(Complex::new(*w, 0.0), &s.matrix);
        }
        Ok(Self::from_trusted(m))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn qubits(&self) -> Option<usize> {
        qubit_count(self.dim())
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn purity(&self) -> f64 {
        self.matrix.trace_product(&self.matrix).re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        herm_eig_unchecked(&self.matrix).values
    }

    /// `Tr(ρ m)`.
    pub fn expectation(&self, m: &ComplexMatrix) -> Complex {
        self.matrix.trace_product(m)
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        Self {
            matrix: kron(&self.matrix, &other.matrix),
        }
    }
}

/// Unit vector in `C^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex>,
}

impl PureState {
    /// Wraps a unit vector; the norm must be within [`PURE_NORM_TOL`] of 1.
    pub fn new(amplitudes: Vec<Complex>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidShape("empty state vector".into()));
        }
        if amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite("state amplitude".into()));
        }
        let norm = norm(&amplitudes);
        if (norm - 1.0).abs() > PURE_NORM_TOL {
            return Err(Error::InvalidState(format!(
                "state norm is {norm}, expected 1"
            )));
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes an arbitrary non-zero vector.
    pub fn normalized(amplitudes: Vec<Complex>) -> Result<Self> {
        let n = norm(&amplitudes);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidState(
                "cannot normalize a zero or non-finite vector".into(),
            ));
        }
        Self::new(amplitudes.into_iter().map(|z| z / n).collect())
    }

    pub fn basis(dim: usize, i: usize) -> Result<Self> {
        if i >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {i} out of range for dim {dim}"
            )));
        }
        let mut v = vec![ZERO; dim];
        v[i] = ONE;
        Ok(Self { amplitudes: v })
    }

    /// `|0…0⟩` on `n` qubits.
    pub fn zero_state(qubits: usize) -> Self {
        let mut v = vec![ZERO; 1 << qubits];
        v[0] = ONE;
        Self { amplitudes: v }
    }

    /// `Σ_i e_i ⊗ e_i / √d` on `C^d ⊗ C^d`.
    pub fn maximally_entangled(d: usize) -> Self {
        let mut v = vec![ZERO; d * d];
        let amp = Complex::new(1.0 / (d as f64).sqrt(), 0.0);
        for i in 0..d {
            v[i * d + i] = amp;
        }
        Self { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex] {
        &self.amplitudes
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Complex {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }

    /// `⟨v|m|v⟩`.
    pub fn expectation(&self, m: &ComplexMatrix) -> Complex {
        let mv = m.matvec(&self.amplitudes);
        self.amplitudes
            .iter()
            .zip(&mv)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

fn norm(v: &[Complex]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Marginal of a bipartite density matrix; `traced` names the removed factor.
pub fn partial_trace(
    rho: &DensityMatrix,
    traced: Subsystem,
    dims: (usize, usize),
) -> Result<DensityMatrix> {
    Ok(DensityMatrix::from_trusted(partial_trace_op(
        rho.matrix(),
        traced,
        dims,
    )?))
}

fn check_dims(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`, clamped to `[0, 1]`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(rho, sigma)?;
    let sr = mat_sqrt_psd(rho.matrix())?;
    let inner = sr.matmul(sigma.matrix()).matmul(&sr).hermitian_part();
    let eig = herm_eig(&inner)?;
    let root: f64 = eig.values.iter().map(|&x| x.max(0.0).sqrt()).sum();
    Ok((root * root).clamp(0.0, 1.0))
}

/// Fidelity between a pure state `v` and `σ`: `⟨v|σ|v⟩`.
pub fn fidelity_pure(v: &PureState, sigma: &DensityMatrix) -> Result<f64> {
    if v.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: v.dim(),
            found: sigma.dim(),
        });
    }
    Ok(v.expectation(sigma.matrix()).re.clamp(0.0, 1.0))
}

/// Trace norm of `ρ − σ` (sum of absolute eigenvalues).
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(rho, sigma)?;
    let diff = rho.matrix() - sigma.matrix();
    Ok(herm_eig(&diff)?.values.iter().map(|x| x.abs()).sum())
}

/// Returns the unit vector when `rho` has rank one within `tol`.
pub fn as_pure(rho: &DensityMatrix, tol: f64) -> Option<PureState> {
    let eig = herm_eig_unchecked(rho.matrix());
    let n = eig.dim();
    if (eig.max() - 1.0).abs() > tol {
        return None;
    }
    let v: Vec<Complex> = (0..n).map(|r| eig.vectors[(r, n - 1)]).collect();
    PureState::normalized(v).ok()
}
