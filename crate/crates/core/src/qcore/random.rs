//! Random matrices and states for tests, oracles, and experiment targets.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::matrix::{Complex, ComplexMatrix};
use super::state::{DensityMatrix, PureState};

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex::new(re, im)
}

/// Haar-random unit vector in `C^d`.
pub fn random_pure<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> PureState {
    loop {
        let v: Vec<Complex> = (0..dim).map(|_| complex_normal(rng)).collect();
        if let Ok(s) = PureState::normalized(v) {
            return s;
        }
    }
}

/// Hilbert–Schmidt random density matrix of the given rank (`G G† / Tr`, `G` Ginibre `d × rank`).
pub fn random_density<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> DensityMatrix {
    let rank = rank.clamp(1, dim);
    let g = ComplexMatrix::from_fn(dim, rank, |_, _| complex_normal(rng));
    let m = g.matmul(&g.adjoint());
    let tr = m.trace().re;
    DensityMatrix::from_trusted(m.scale_real(1.0 / tr))
}

/// Hermitian matrix with standard-normal entries scaled by `scale`.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, scale: f64, rng: &mut R) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| complex_normal(rng));
    g.hermitian_part().scale_real(scale)
}

/// Haar-random unitary via QR-free Gram–Schmidt on a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let mut cols: Vec<Vec<Complex>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<Complex> = (0..dim).map(|_| complex_normal(rng)).collect();
        for u in &cols {
            let ov: Complex = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(u) {
                *x -= ov * y;
            }
        }
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-8 {
            cols.push(v.into_iter().map(|z| z / n).collect());
        }
    }
    ComplexMatrix::from_fn(dim, dim, |r, c| cols[c][r])
}
