//! Finite-difference audit of every analytic gradient.

use qwgan::circuit::{GeneratorEnsemble, InitialState, Layout};
use qwgan::qcore::random::random_density;
use qwgan::qcore::DensityMatrix;
use qwgan::trainer::{
    generator_loss, grad_discriminator, grad_logits, grad_theta_exact, grad_theta_shift,
    DiscriminatorGradient,
};
use qwgan::wasserstein::{gan_loss, DualVariables, RegularizerMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::GradCheckSettings;
use crate::error::CliError;

pub const ABS_TOL: f64 = 1e-6;
pub const REL_TOL: f64 = 1e-4;
pub const SHIFT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub instance: usize,
    pub qubits: usize,
    pub kind: &'static str,
    pub index: usize,
    pub analytic: f64,
    pub reference: f64,
    pub passed: bool,
}

fn fd_ok(analytic: f64, numeric: f64) -> bool {
    (analytic - numeric).abs() <= ABS_TOL.max(REL_TOL * numeric.abs())
}

struct Instance {
    g: GeneratorEnsemble,
    q: DensityMatrix,
    dv: DualVariables,
}

fn instance(qubits: usize, rng: &mut ChaCha8Rng) -> Result<Instance, CliError> {
    let layout = Layout::generic(qubits, 1)?;
    let mut g = GeneratorEnsemble::random(&layout, 2, InitialState::Zero, rng)?;
    let logits: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();
    g.set_logits(&logits)?;
    let q = random_density(1 << qubits, 2, rng);
    let k = 1 << (2 * qubits);
    let alpha: Vec<f64> = (0..k).map(|_| rng.gen_range(-0.3..0.3)).collect();
    let beta: Vec<f64> = (0..k).map(|_| rng.gen_range(-0.3..0.3)).collect();
    let lambda = rng.gen_range(1.0..3.0);
    let dv = DualVariables::from_coefficients(qubits, &alpha, &beta, lambda)?;
    Ok(Instance { g, q, dv })
}

/// Compares analytic gradients against central differences on random instances.
///
/// Instance `i` uses `1 + i mod max_qubits` qubits. Parameter-shift gradients
/// are compared against the exact angle gradients.
pub fn run_grad_check(
    settings: &GradCheckSettings,
    seed: u64,
) -> Result<Vec<Comparison>, CliError> {
    let mode = RegularizerMode::Exact;
    let h = settings.step;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for i in 0..settings.instances {
        let qubits = 1 + i % settings.max_qubits;
        let Instance { g, q, dv } = instance(qubits, &mut rng)?;
        let mut push = |kind, index, analytic: f64, reference: f64, passed| {
            out.push(Comparison {
                instance: i,
                qubits,
                kind,
                index,
                analytic,
                reference,
                passed,
            })
        };

        let loss_at = |g: &GeneratorEnsemble| generator_loss(g, &q, &dv, mode);
        let d_logits = grad_logits(&g, &q, &dv, mode)?;
        for (k, &a) in d_logits.iter().enumerate() {
            let mut z = g.logits().to_vec();
            z[k] += h;
            let mut gp = g.clone();
            gp.set_logits(&z)?;
            z[k] -= 2.0 * h;
            let mut gm = g.clone();
            gm.set_logits(&z)?;
            let num = (loss_at(&gp)? - loss_at(&gm)?) / (2.0 * h);
            push("logit", k, a, num, fd_ok(a, num));
        }

        let exact: Vec<f64> = grad_theta_exact(&g, &q, &dv, mode)?.concat();
        let shift: Vec<f64> = grad_theta_shift(&g, &q, &dv, mode)?.concat();
        let angles = g.flat_angles();
        for (k, (&a, &s)) in exact.iter().zip(&shift).enumerate() {
            let mut th = angles.clone();
            th[k] += h;
            let mut gp = g.clone();
            gp.set_flat_angles(&th)?;
            th[k] -= 2.0 * h;
            let mut gm = g.clone();
            gm.set_flat_angles(&th)?;
            let num = (loss_at(&gp)? - loss_at(&gm)?) / (2.0 * h);
            push("theta", k, a, num, fd_ok(a, num));
            push("theta_shift", k, s, a, (s - a).abs() <= SHIFT_TOL);
        }

        let p = g.generate_state();
        let (da, db) = grad_discriminator(&p, &q, &dv, mode, DiscriminatorGradient::FrechetExact)?;
        let alpha = dv.alpha();
        for (k, &a) in da.iter().enumerate() {
            let mut c = alpha.clone();
            c[k] += h;
            let mut plus = dv.clone();
            plus.set_alpha(&c)?;
            c[k] -= 2.0 * h;
            let mut minus = dv.clone();
            minus.set_alpha(&c)?;
            let num =
                (gan_loss(&p, &q, &plus, mode)? - gan_loss(&p, &q, &minus, mode)?) / (2.0 * h);
            push("alpha", k, a, num, fd_ok(a, num));
        }
        let beta = dv.beta();
        for (k, &a) in db.iter().enumerate() {
            let mut c = beta.clone();
            c[k] += h;
            let mut plus = dv.clone();
            plus.set_beta(&c)?;
            c[k] -= 2.0 * h;
            let mut minus = dv.clone();
            minus.set_beta(&c)?;
            let num =
                (gan_loss(&p, &q, &plus, mode)? - gan_loss(&p, &q, &minus, mode)?) / (2.0 * h);
            push("beta", k, a, num, fd_ok(a, num));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_audit_passes() {
        let s = GradCheckSettings {
            instances: 2,
            max_qubits: 2,
            step: 1e-5,
        };
        let rows = run_grad_check(&s, 9).unwrap();
        assert!(rows.iter().any(|r| r.qubits == 2));
        assert!(
            rows.iter().all(|r| r.passed),
            "{:?}",
            rows.iter().find(|r| !r.passed)
        );
    }
}
