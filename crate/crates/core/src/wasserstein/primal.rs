use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::{
    cost_matrix, herm_eig, herm_eig_unchecked, kron, partial_trace_op, Complex, ComplexMatrix,
    DensityMatrix, Subsystem,
};

/// Largest per-side dimension accepted by the primal oracle.
pub const MAX_PRIMAL_DIM: usize = 64;

/// The coupling program `min Tr(πC)` over `π ⪰ 0` with `Tr_Y π = P`, `Tr_X π = Q`.
#[derive(Clone, Debug)]
pub struct CouplingProblem {
    pub p: DensityMatrix,
    pub q: DensityMatrix,
    /// Required marginal residual (Frobenius norm).
    pub residual_tol: f64,
    /// Required change of the objective between outer iterations.
    pub objective_tol: f64,
    pub max_iterations: usize,
    /// Initial step `η₀` of the schedule `η_t = η₀/√t`.
    pub step0: f64,
    /// Iteration cap of each inner projection.
    pub max_inner_iterations: usize,
    pub projection: ProjectionMethod,
}

/// How the step `π − η·C` is mapped back onto the feasible couplings.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ProjectionMethod {
    /// Exact Frobenius projection through L-BFGS on its dual, warm-started
    /// between outer iterations.
    #[default]
    Dual,
    /// Dykstra's alternating projection between the affine marginal set and the PSD cone.
    Dykstra,
}

impl CouplingProblem {
    pub fn new(p: DensityMatrix, q: DensityMatrix) -> Result<Self> {
        if p.dim() != q.dim() {
            return Err(Error::DimensionMismatch {
                expected: p.dim(),
                found: q.dim(),
            });
        }
        if p.dim() > MAX_PRIMAL_DIM {
            return Err(Error::InvalidArgument(format!(
                "primal oracle supports dimension at most {MAX_PRIMAL_DIM}, got {}",
                p.dim()
            )));
        }
        Ok(Self {
            p,
            q,
            residual_tol: 1e-8,
            objective_tol: 1e-9,
            max_iterations: 200_000,
            step0: 1000.0,
            max_inner_iterations: 20_000,
            projection: ProjectionMethod::Dual,
        })
    }

    pub fn dim(&self) -> usize {
        self.p.dim()
    }

    pub fn cost(&self) -> ComplexMatrix {
        cost_matrix(self.dim())
    }
}

/// Solution of the coupling program and solver diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct PrimalSolution {
    pub value: f64,
    #[serde(skip)]
    pub coupling: DensityMatrix,
    pub iterations: usize,
    pub inner_iterations: usize,
    pub marginal_residual: f64,
    pub objective_change: f64,
}

/// Eigenvalues below this are treated as outside a marginal's support.
const SUPPORT_TOL: f64 = 1e-10;

struct Marginals {
    p: ComplexMatrix,
    q: ComplexMatrix,
    dp: usize,
    dq: usize,
}

impl Marginals {
    fn residuals(&self, pi: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
        let dims = (self.dp, self.dq);
        let rp = &self.p - &partial_trace_op(pi, Subsystem::Y, dims).expect("square");
        let rq = &self.q - &partial_trace_op(pi, Subsystem::X, dims).expect("square");
        (rp, rq)
    }

    fn residual_norm(&self, pi: &ComplexMatrix) -> f64 {
        let (rp, rq) = self.residuals(pi);
        rp.frobenius_norm().max(rq.frobenius_norm())
    }

    /// Frobenius projection onto `{π : Tr_Y π = P, Tr_X π = Q}`.
    fn project_affine(&self, pi: &ComplexMatrix) -> ComplexMatrix {
        let (dp, dq) = (self.dp, self.dq);
        let (rp, rq) = self.residuals(pi);
        let t = rp.trace().re;
        let mut out = pi.clone();
        out.add_scaled(
            Complex::new(1.0 / dq as f64, 0.0),
            &kron(&rp, &ComplexMatrix::identity(dq)),
        );
        out.add_scaled(
            Complex::new(1.0 / dp as f64, 0.0),
            &kron(&ComplexMatrix::identity(dp), &rq),
        );
        let shift = Complex::new(-t / (dp * dq) as f64, 0.0);
        for i in 0..dp * dq {
            out[(i, i)] += shift;
        }
        out
    }
}

/// Eigenvalue clipping onto the PSD cone.
fn project_psd(m: &ComplexMatrix) -> ComplexMatrix {
    let eig = herm_eig(&m.hermitian_part()).expect("Hermitian by construction");
    eig.map(|x| x.max(0.0))
}

/// Dykstra's alternating projection onto the affine marginal set and the PSD cone.
fn project_feasible(
    start: &ComplexMatrix,
    marg: &Marginals,
    tol: f64,
    cap: usize,
) -> (ComplexMatrix, usize) {
    let mut x = start.clone();
    let mut q_corr = ComplexMatrix::zeros(x.rows(), x.cols());
    let mut iters = 0;
    loop {
        iters += 1;
        let a = marg.project_affine(&x);
        let shifted = &a + &q_corr;
        let next = project_psd(&shifted);
        q_corr = &shifted - &next;
        let step = (&next - &x).frobenius_norm();
        x = next;
        if (marg.residual_norm(&x) < tol && step < tol) || iters >= cap {
            return (x, iters);
        }
    }
}

/// Coordinates of a Hermitian matrix in an orthonormal real basis.
fn herm_coords(m: &ComplexMatrix, out: &mut Vec<f64>) {
    let n = m.rows();
    let r2 = std::f64::consts::SQRT_2;
    for i in 0..n {
        out.push(m[(i, i)].re);
        for j in i + 1..n {
            out.push(r2 * m[(i, j)].re);
            out.push(r2 * m[(i, j)].im);
        }
    }
}

fn herm_from_coords(n: usize, v: &[f64]) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut k = 0;
    for i in 0..n {
        m[(i, i)] = Complex::new(v[k], 0.0);
        k += 1;
        for j in i + 1..n {
            let z = Complex::new(r * v[k], r * v[k + 1]);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            k += 2;
        }
    }
    m
}

/// `A⊗I + I⊗B` for the dual coordinates `v = (A, B)`.
fn adjoint_map(marg: &Marginals, v: &[f64]) -> ComplexMatrix {
    let (dp, dq) = (marg.dp, marg.dq);
    let a = herm_from_coords(dp, &v[..dp * dp]);
    let b = herm_from_coords(dq, &v[dp * dp..]);
    &kron(&a, &ComplexMatrix::identity(dq)) + &kron(&ComplexMatrix::identity(dp), &b)
}

/// Coordinates of `(Tr_Y m, Tr_X m)`.
fn marginal_map(marg: &Marginals, m: &ComplexMatrix) -> Vec<f64> {
    let dims = (marg.dp, marg.dq);
    let mut out = Vec::with_capacity(marg.dp * marg.dp + marg.dq * marg.dq);
    herm_coords(
        &partial_trace_op(m, Subsystem::Y, dims).expect("square"),
        &mut out,
    );
    herm_coords(
        &partial_trace_op(m, Subsystem::X, dims).expect("square"),
        &mut out,
    );
    out
}

/// The dual function `θ(v) = ½‖[Y + A⊗I + I⊗B]₊‖² − Tr(AP) − Tr(BQ)` at one point.
struct DualPoint {
    f: f64,
    g: Vec<f64>,
    pi: ComplexMatrix,
    eig: crate::qcore::HermitianEigen,
}

fn projection_dual(y: &ComplexMatrix, marg: &Marginals, v: &[f64]) -> DualPoint {
    let m = y + &adjoint_map(marg, v);
    let eig = herm_eig_unchecked(&m.hermitian_part());
    let pi = eig.map(|x| x.max(0.0));
    let mut target = Vec::with_capacity(v.len());
    herm_coords(&marg.p, &mut target);
    herm_coords(&marg.q, &mut target);
    let f = 0.5 * pi.frobenius_norm().powi(2) - dot(v, &target);
    let g = marginal_map(marg, &pi)
        .iter()
        .zip(&target)
        .map(|(a, b)| a - b)
        .collect();
    DualPoint { f, g, pi, eig }
}

/// Generalized Hessian of `θ` applied to `h`, plus `eps·h`.
fn hessian_apply(marg: &Marginals, pt: &DualPoint, h: &[f64], eps: f64) -> Vec<f64> {
    let lam = &pt.eig.values;
    let mut t = pt.eig.to_eigenbasis(&adjoint_map(marg, h));
    let n = lam.len();
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (lam[i], lam[j]);
            let w = if a > 0.0 && b > 0.0 {
                1.0
            } else if a <= 0.0 && b <= 0.0 {
                0.0
            } else {
                (a.max(0.0) - b.max(0.0)) / (a - b)
            };
            t[(i, j)] *= w;
        }
    }
    let back = pt.eig.from_eigenbasis(&t);
    marginal_map(marg, &back)
        .iter()
        .zip(h)
        .map(|(a, b)| a + eps * b)
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Conjugate gradients for `H d = rhs` with `H` given as a product.
fn conjugate_gradient(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    rhs: &[f64],
    tol: f64,
    cap: usize,
) -> Vec<f64> {
    let mut x = vec![0.0; rhs.len()];
    let mut r = rhs.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    for _ in 0..cap {
        if rr.sqrt() <= tol {
            break;
        }
        let ap = apply(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rr / pap;
        for k in 0..x.len() {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        let rr_next = dot(&r, &r);
        let beta = rr_next / rr;
        for k in 0..p.len() {
            p[k] = r[k] + beta * p[k];
        }
        rr = rr_next;
    }
    x
}

/// Frobenius projection of `y` onto the feasible couplings by a semismooth
/// Newton-CG method on the dual function, which is convex with Lipschitz
/// gradient. `v` holds the dual point and is updated in place.
fn project_dual(
    y: &ComplexMatrix,
    marg: &Marginals,
    v: &mut Vec<f64>,
    tol: f64,
    cap: usize,
) -> (ComplexMatrix, usize) {
    let mut pt = projection_dual(y, marg, v);
    let mut iters = 0;
    loop {
        let gnorm = dot(&pt.g, &pt.g).sqrt();
        if gnorm < tol || iters >= cap {
            return (pt.pi, iters);
        }
        iters += 1;
        let eps = 1e-6 * gnorm.min(1.0);
        let rhs: Vec<f64> = pt.g.iter().map(|x| -x).collect();
        let cg_tol = (gnorm * gnorm.sqrt().min(0.1)).max(tol * 1e-2);
        let mut dir = conjugate_gradient(
            |h| hessian_apply(marg, &pt, h, eps),
            &rhs,
            cg_tol,
            2 * v.len() + 10,
        );
        let mut slope = dot(&dir, &pt.g);
        if !(slope < 0.0) {
            dir = rhs;
            slope = -gnorm * gnorm;
        }
        let noise = 1e-14 * pt.f.abs().max(1.0);
        let mut step = 1.0;
        let next = loop {
            let trial: Vec<f64> = v.iter().zip(&dir).map(|(a, b)| a + step * b).collect();
            let cand = projection_dual(y, marg, &trial);
            let decrease = cand.f <= pt.f + 1e-4 * step * slope + noise;
            if decrease || dot(&cand.g, &cand.g).sqrt() <= 0.5 * gnorm {
                break Some((trial, cand));
            }
            step *= 0.5;
            if step < 1e-12 {
                break None;
            }
        };
        let Some((trial, cand)) = next else {
            return (pt.pi, iters);
        };
        *v = trial;
        pt = cand;
    }
}

/// Isometry onto the eigenvectors of `rho` with eigenvalue above [`SUPPORT_TOL`],
/// and `rho` compressed to that subspace.
fn support(rho: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let eig = herm_eig(rho).expect("density matrix");
    let keep: Vec<usize> = (0..eig.dim())
        .filter(|&i| eig.values[i] > SUPPORT_TOL)
        .collect();
    let v = ComplexMatrix::from_fn(rho.rows(), keep.len(), |r, c| eig.vectors[(r, keep[c])]);
    let compressed = v.adjoint().matmul(rho).matmul(&v).hermitian_part();
    (v, compressed)
}

/// Solves the coupling program by projected gradient with step `η₀/√t`.
///
/// Every coupling is supported on `supp(P) ⊗ supp(Q)`, so the program is
/// first compressed to that subspace, where it is strictly feasible.
pub fn qw_primal(prob: &CouplingProblem) -> Result<PrimalSolution> {
    let d = prob.dim();
    let full_cost = prob.cost();
    let (vp, p) = support(prob.p.matrix());
    let (vq, q) = support(prob.q.matrix());
    let w = kron(&vp, &vq);
    let cost = w.adjoint().matmul(&full_cost).matmul(&w).hermitian_part();
    let marg = Marginals {
        dp: p.rows(),
        dq: q.rows(),
        p,
        q,
    };
    let lift = |pi: &ComplexMatrix| w.matmul(pi).matmul(&w.adjoint());
    let full = Marginals {
        p: prob.p.matrix().clone(),
        q: prob.q.matrix().clone(),
        dp: d,
        dq: d,
    };

    let inner_tol = prob.residual_tol * 0.1;
    let mut pi = kron(&marg.p, &marg.q);
    let mut value = pi.trace_product(&cost).re;
    let mut inner_total = 0;
    let mut change = f64::INFINITY;
    let mut residual = marg.residual_norm(&pi);
    let singleton = marg.dp == 1 || marg.dq == 1;
    let mut dual_point = vec![0.0; marg.dp * marg.dp + marg.dq * marg.dq];
    for t in 1..=prob.max_iterations {
        if singleton {
            change = 0.0;
        } else {
            let eta = prob.step0 / (t as f64).sqrt();
            let mut trial = pi.clone();
            trial.add_scaled(Complex::new(-eta, 0.0), &cost);
            let (next, inner) = match prob.projection {
                ProjectionMethod::Dual => project_dual(
                    &trial,
                    &marg,
                    &mut dual_point,
                    inner_tol,
                    prob.max_inner_iterations,
                ),
                ProjectionMethod::Dykstra => {
                    project_feasible(&trial, &marg, inner_tol, prob.max_inner_iterations)
                }
            };
            inner_total += inner;
            let next_value = next.trace_product(&cost).re;
            change = (next_value - value).abs();
            pi = next;
            value = next_value;
        }
        residual = marg.residual_norm(&pi);
        if change < prob.objective_tol && residual < prob.residual_tol {
            let coupling = lift(&pi);
            return Ok(PrimalSolution {
                value: coupling.trace_product(&full_cost).re,
                marginal_residual: full.residual_norm(&coupling),
                coupling: DensityMatrix::from_trusted(coupling),
                iterations: t,
                inner_iterations: inner_total,
                objective_change: change,
            });
        }
    }
    Err(Error::NotConverged {
        iterations: prob.max_iterations,
        marginal_residual: residual,
        objective_change: change,
    })
}
