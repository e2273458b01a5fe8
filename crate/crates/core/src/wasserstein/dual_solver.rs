use super::{loss_with, DualVariables, Regularizer, RegularizerMode};
use crate::error::{Error, Result};
use crate::qcore::{herm_eig, DensityMatrix};

/// Settings for [`maximize_regularized_dual`].
#[derive(Clone, Copy, Debug)]
pub struct DualSolveOptions {
    pub mode: RegularizerMode,
    pub max_iterations: usize,
    /// Stop once the largest gradient component falls below this.
    pub gradient_tol: f64,
}

impl Default for DualSolveOptions {
    fn default() -> Self {
        Self {
            mode: RegularizerMode::Exact,
            max_iterations: 5000,
            gradient_tol: 1e-9,
        }
    }
}

/// Result of maximizing the regularized loss over the discriminator.
#[derive(Clone, Debug)]
pub struct DualSolution {
    pub dv: DualVariables,
    pub value: f64,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub converged: bool,
}

struct Point {
    x: Vec<f64>,
    f: f64,
    g: Vec<f64>,
}

/// Negated loss and gradient at the flattened coefficients `x = (α, β)`.
fn evaluate(
    p: &DensityMatrix,
    q: &DensityMatrix,
    template: &DualVariables,
    mode: RegularizerMode,
    x: &[f64],
) -> Option<Point> {
    let na = template.phi().len();
    let mut dv = template.clone();
    dv.set_alpha(&x[..na]).ok()?;
    dv.set_beta(&x[na..]).ok()?;
    let reg = Regularizer::new(&dv, mode).ok()?;
    let (pm, qm) = (p.matrix(), q.matrix());
    let loss = loss_with(pm, qm, &dv, &reg);
    let (ga, gb) = reg.coefficient_gradients(pm, qm).ok()?;
    let mut g = Vec::with_capacity(x.len());
    for ((_, s), gk) in dv.phi().terms().iter().zip(&ga) {
        g.push(-(-s.expectation(pm) - gk));
    }
    for ((_, s), gk) in dv.psi().terms().iter().zip(&gb) {
        g.push(-(s.expectation(qm) - gk));
    }
    let ok = loss.is_finite() && g.iter().all(|v| v.is_finite());
    ok.then(|| Point {
        x: x.to_vec(),
        f: -loss,
        g,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Maximizes the regularized loss over `(α, β)` with BFGS and backtracking line search.
pub fn maximize_regularized_dual(
    p: &DensityMatrix,
    q: &DensityMatrix,
    initial: &DualVariables,
    opts: DualSolveOptions,
) -> Result<DualSolution> {
    let mode = opts.mode;
    let mut x0 = initial.alpha();
    x0.extend(initial.beta());
    let n = x0.len();
    let mut cur = evaluate(p, q, initial, mode, &x0)
        .ok_or_else(|| Error::NonFinite("regularized loss at the initial point".into()))?;
    let mut h = identity(n);
    let mut scaled = false;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        if inf_norm(&cur.g) < opts.gradient_tol {
            converged = true;
            break;
        }
        iterations += 1;
        let mut dir: Vec<f64> = mat_vec(&h, &cur.g).into_iter().map(|v| -v).collect();
        let mut slope = dot(&dir, &cur.g);
        if slope >= 0.0 {
            h = identity(n);
            dir = cur.g.iter().map(|v| -v).collect();
            slope = dot(&dir, &cur.g);
        }
        let mut step = 1.0;
        let next = loop {
            let xn: Vec<f64> = cur.x.iter().zip(&dir).map(|(a, b)| a + step * b).collect();
            if let Some(pt) = evaluate(p, q, initial, mode, &xn) {
                if pt.f <= cur.f + 1e-4 * step * slope {
                    break Some(pt);
                }
            }
            step *= 0.5;
            if step < 1e-20 {
                break None;
            }
        };
        let Some(next) = next else {
            converged = inf_norm(&cur.g) < opts.gradient_tol.sqrt();
            break;
        };
        let s: Vec<f64> = next.x.iter().zip(&cur.x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = next.g.iter().zip(&cur.g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-14 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if !scaled {
                let gamma = sy / dot(&y, &y);
                h = identity(n)
                    .into_iter()
                    .map(|row| row.into_iter().map(|v| v * gamma).collect())
                    .collect();
                scaled = true;
            }
            bfgs_update(&mut h, &s, &y, sy);
        }
        cur = next;
    }
    let na = initial.phi().len();
    let mut dv = initial.clone();
    dv.set_alpha(&cur.x[..na])?;
    dv.set_beta(&cur.x[na..])?;
    Ok(DualSolution {
        dv,
        value: -cur.f,
        iterations,
        gradient_norm: inf_norm(&cur.g),
        converged,
    })
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, v)).collect()
}

/// `H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ`.
fn bfgs_update(h: &mut [Vec<f64>], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy = mat_vec(h, y);
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i][j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

/// Shifts `φ` by the smallest multiple of the identity making `C − I⊗ψ + φ⊗I ⪰ 0`.
pub fn make_feasible(dv: &DualVariables) -> Result<DualVariables> {
    let min = herm_eig(&dv.slack())?.min();
    Ok(if min < 0.0 {
        dv.shift_phi(-min)
    } else {
        dv.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wasserstein::{dual_objective, gan_loss};

    #[test]
    fn maximizer_improves_and_stays_stationary() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(1);
        let p = crate::qcore::random::random_density(2, 2, &mut rng);
        let q = crate::qcore::random::random_density(2, 2, &mut rng);
        let dv0 = DualVariables::zeros(1, 1.0).unwrap();
        let start = gan_loss(&p, &q, &dv0, RegularizerMode::Exact).unwrap();
        let sol = maximize_regularized_dual(&p, &q, &dv0, DualSolveOptions::default()).unwrap();
        assert!(sol.converged, "{sol:?}");
        assert!(sol.value > start);
        let feasible = make_feasible(&sol.dv).unwrap();
        let obj = dual_objective(&p, &q, &feasible, true).unwrap();
        assert!(obj.feasibility.unwrap().feasible);
        assert!(obj.value <= 0.5 + 1e-9);
        assert!(sol.value > obj.value);
    }
}
