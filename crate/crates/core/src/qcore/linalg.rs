use faer::Side;

use super::matrix::{Complex, ComplexMatrix};
use crate::error::{Error, Result};

/// Tolerance on `|h_ij − conj(h_ji)|` (scaled by `max(1, max|h|)`) accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-9;

/// Eigenvalue floor applied by [`mat_log_psd`] when flooring is requested.
pub const LOG_FLOOR: f64 = 1e-12;

/// Spectral decomposition `h = V diag(values) V†` with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

/// Eigendecomposition of a Hermitian matrix.
///
/// The input is symmetrized before decomposition; deviations beyond
/// [`HERMITIAN_TOL`] are rejected.
pub fn herm_eig(h: &ComplexMatrix) -> Result<HermitianEigen> {
    if !h.is_square() {
        return Err(Error::InvalidShape(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    if !h.is_finite() {
        return Err(Error::NonFinite("eigendecomposition input".into()));
    }
    let deviation = h.hermiticity_error();
    if deviation > HERMITIAN_TOL * h.max_abs().max(1.0) {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(herm_eig_unchecked(&h.hermitian_part()))
}

pub(crate) fn herm_eig_unchecked(h: &ComplexMatrix) -> HermitianEigen {
    let n = h.rows();
    if n == 0 {
        return HermitianEigen {
            values: vec![],
            vectors: ComplexMatrix::zeros(0, 0),
        };
    }
    let evd = h.to_faer().selfadjoint_eigendecomposition(Side::Lower);
    let s = evd.s().column_vector();
    let u = evd.u();
    let mut order: Vec<usize> = (0..n).collect();
    let raw: Vec<f64> = (0..n).map(|i| s.read(i).re).collect();
    order.sort_by(|&a, &b| raw[a].total_cmp(&raw[b]));
    let values = order.iter().map(|&i| raw[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| {
        let z = u.read(r, order[c]);
        Complex::new(z.re, z.im)
    });
    HermitianEigen { values, vectors }
}

impl HermitianEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NAN)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::NAN)
    }

    /// `V diag(f(λ)) V†` for a complex-valued spectral function.
    pub fn map_complex(&self, f: impl Fn(f64) -> Complex) -> ComplexMatrix {
        let n = self.dim();
        let fv: Vec<Complex> = self.values.iter().map(|&x| f(x)).collect();
        let scaled = ComplexMatrix::from_fn(n, n, |r, c| self.vectors[(r, c)] * fv[c]);
        scaled.matmul(&self.vectors.adjoint())
    }

    /// `V diag(f(λ)) V†` for a real spectral function; the result is Hermitian.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        self.map_complex(|x| Complex::new(f(x), 0.0))
            .hermitian_part()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map(|x| x)
    }

    /// `V† m V`: `m` expressed in the eigenbasis.
    pub fn to_eigenbasis(&self, m: &ComplexMatrix) -> ComplexMatrix {
        self.vectors.adjoint().matmul(m).matmul(&self.vectors)
    }

    /// `V m V†`: maps an eigenbasis operator back to the standard basis.
    pub fn from_eigenbasis(&self, m: &ComplexMatrix) -> ComplexMatrix {
        self.vectors.matmul(m).matmul(&self.vectors.adjoint())
    }

    /// Fréchet derivative of the matrix exponential at `V diag(λ) V†` in direction `e`.
    ///
    /// Uses the Daleckii–Krein formula `V (Γ ∘ V† e V) V†` with first divided
    /// differences `Γ_ij = (e^{λ_i} − e^{λ_j}) / (λ_i − λ_j)`.
    pub fn exp_frechet(&self, e: &ComplexMatrix) -> ComplexMatrix {
        let n = self.dim();
        let mut inner = self.to_eigenbasis(e);
        for i in 0..n {
            for j in 0..n {
                inner[(i, j)] *= exp_divided_difference(self.values[i], self.values[j]);
            }
        }
        self.from_eigenbasis(&inner)
    }
}

/// `(e^a − e^b)/(a − b)`, evaluated stably including `a = b`.
pub fn exp_divided_difference(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    let delta = hi - lo;
    if delta == 0.0 {
        return hi.exp();
    }
    lo.exp() * delta.exp_m1() / delta
}

/// `exp(h)` for Hermitian `h`.
pub fn mat_exp_herm(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(herm_eig(h)?.map(f64::exp))
}

/// `exp(i·t·h)` for Hermitian `h`; the result is unitary.
pub fn mat_exp_i_herm(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    Ok(herm_eig(h)?.map_complex(|x| Complex::from_polar(1.0, t * x)))
}

/// Matrix logarithm of a positive semidefinite matrix.
///
/// With `floor = None` any eigenvalue `≤ 0` is a domain error. With
/// `Some(f)` eigenvalues are clamped to at least `f` before the logarithm.
pub fn mat_log_psd(rho: &ComplexMatrix, floor: Option<f64>) -> Result<ComplexMatrix> {
    let eig = herm_eig(rho)?;
    match floor {
        Some(f) => Ok(eig.map(|x| x.max(f).ln())),
        None => {
            if let Some(&bad) = eig.values.iter().find(|&&x| x <= 0.0) {
                return Err(Error::Domain(format!(
                    "logarithm of a singular matrix (eigenvalue {bad:e}); enable flooring"
                )));
            }
            Ok(eig.map(f64::ln))
        }
    }
}

/// Square root of a positive semidefinite matrix; small negative eigenvalues are clipped.
pub fn mat_sqrt_psd(rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(herm_eig(rho)?.map(|x| x.max(0.0).sqrt()))
}

/// Eigenvalues of a general square complex matrix (unordered).
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex>> {
    if !m.is_square() {
        return Err(Error::InvalidShape(
            "eigenvalues need a square matrix".into(),
        ));
    }
    if m.rows() == 0 {
        return Ok(vec![]);
    }
    let vals: Vec<faer::complex_native::c64> = m.to_faer().eigenvalues();
    Ok(vals.into_iter().map(|z| Complex::new(z.re, z.im)).collect())
}

/// Spectral norm (largest singular value).
pub fn spectral_norm(m: &ComplexMatrix) -> f64 {
    let gram = m.adjoint().matmul(m);
    herm_eig_unchecked(&gram.hermitian_part())
        .max()
        .max(0.0)
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::matrix::{I, ONE, ZERO};

    fn pauli(which: char) -> ComplexMatrix {
        match which {
            'x' => ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap(),
            'y' => ComplexMatrix::from_vec(2, 2, vec![ZERO, -I, I, ZERO]).unwrap(),
            'z' => ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]).unwrap(),
            _ => unreachable!(),
        }
    }

    #[test]
    fn eig_examples() {
        let z = herm_eig(&pauli('z')).unwrap();
        assert_eq!(z.values, vec![-1.0, 1.0]);

        let x = herm_eig(&pauli('x')).unwrap();
        assert!((x.values[0] + 1.0).abs() < 1e-14 && (x.values[1] - 1.0).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // Eigenvectors are defined up to phase: compare |<expected, v>|.
        let minus = [Complex::new(s, 0.0), Complex::new(-s, 0.0)];
        let plus = [Complex::new(s, 0.0), Complex::new(s, 0.0)];
        for (col, want) in [(0, minus), (1, plus)] {
            let ov: Complex = (0..2).map(|r| want[r].conj() * x.vectors[(r, col)]).sum();
            assert!((ov.norm() - 1.0).abs() < 1e-12);
        }

        let id = herm_eig(&ComplexMatrix::identity(5)).unwrap();
        assert!(id.values.iter().all(|&v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(herm_eig(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn exp_and_log_examples() {
        let zero = ComplexMatrix::zeros(2, 2);
        assert!((&mat_exp_herm(&zero).unwrap() - &ComplexMatrix::identity(2)).max_abs() < 1e-15);

        // exp(i·π·σx/2) = i·σx
        let u = mat_exp_i_herm(&pauli('x'), std::f64::consts::FRAC_PI_2).unwrap();
        assert!((&u - &pauli('x').scale(I)).max_abs() < 1e-14);

        let d = 4;
        let mixed = ComplexMatrix::identity(d).scale_real(1.0 / d as f64);
        let log = mat_log_psd(&mixed, None).unwrap();
        let want = ComplexMatrix::identity(d).scale_real(-(d as f64).ln());
        assert!((&log - &want).max_abs() < 1e-14);

        let pure = ComplexMatrix::outer(&[ONE, ZERO]);
        assert!(matches!(mat_log_psd(&pure, None), Err(Error::Domain(_))));
        let floored = mat_log_psd(&pure, Some(LOG_FLOOR)).unwrap();
        assert!((floored[(1, 1)].re - LOG_FLOOR.ln()).abs() < 1e-9);
    }

    #[test]
    fn divided_difference_limits() {
        assert_eq!(exp_divided_difference(0.3, 0.3), 0.3f64.exp());
        let fd = (1.0f64.exp() - 0.5f64.exp()) / 0.5;
        assert!((exp_divided_difference(1.0, 0.5) - fd).abs() < 1e-14);
        assert!((exp_divided_difference(0.5, 1.0) - fd).abs() < 1e-14);
        let near = exp_divided_difference(2.0, 2.0 + 1e-13);
        assert!((near - 2.0f64.exp()).abs() < 1e-9);
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let m = ComplexMatrix::diagonal(&[Complex::new(-3.0, 0.0), Complex::new(0.0, 2.0)]);
        assert!((spectral_norm(&m) - 3.0).abs() < 1e-12);
    }
}
