//! Gradients of the GAN loss and the alternating training loop.
//!
//! The generated state `P` enters the loss linearly,
//! `L = Tr(Qψ) − Tr(Pφ) − Tr((P⊗Q)ξ)`, so every generator derivative is an
//! expectation of the single observable `O = φ + W` with `Tr(PW) = Tr((P⊗Q)ξ)`.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, GeneratorEnsemble, InitialState, Layout};
use crate::error::{Error, Result};
use crate::parallel::{map_indexed, Execution};
use crate::pauli::{trace_projections, CompiledRotation};
use crate::qcore::{fidelity, Complex, ComplexMatrix, DensityMatrix};
use crate::wasserstein::{loss_with, DualVariables, Regularizer, RegularizerMode};

/// How circuit-angle derivatives are evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaGradient {
    /// Product rule with `dG/dθ = (iσ/2)G`.
    #[default]
    Exact,
    /// `(L(θ + π/2) − L(θ − π/2))/2`.
    ParameterShift,
}

/// How discriminator derivatives of the regularizer are evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscriminatorGradient {
    /// Fréchet derivative of the matrix exponential.
    #[default]
    FrechetExact,
    /// Differentiates `exp(X/λ)` as if the perturbation commuted with `X`.
    CommutingForm,
}

/// Starting angles of the generator circuits.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleInit {
    /// Uniform on `[0, 2π)`.
    #[default]
    Random,
    Zero,
}

#[derive(Clone, Debug)]
pub struct TrainingConfig {
    pub lambda: f64,
    /// Learning rate of the circuit angles.
    pub eta_g: f64,
    /// Learning rate of the discriminator coefficients.
    pub eta_d: f64,
    /// Learning rate of the mixture logits.
    pub eta_p: f64,
    pub epochs: usize,
    /// Discriminator ascent steps per generator step.
    pub disc_steps: usize,
    /// Standard deviation of the Gaussian noise on every measured scalar.
    pub noise_sigma: f64,
    pub seed: u64,
    pub reg_mode: RegularizerMode,
    pub layout: Layout,
    pub rank: usize,
    pub initial: InitialState,
    pub angle_init: AngleInit,
    pub theta_gradient: ThetaGradient,
    pub disc_gradient: DiscriminatorGradient,
    /// Stop after the first epoch whose fidelity reaches this value.
    pub stop_at_fidelity: Option<f64>,
    /// Record elapsed wall time; when off the column is all zeros and
    /// histories are byte-reproducible.
    pub record_wall_time: bool,
    pub execution: Execution,
}

impl TrainingConfig {
    /// Single-rate configuration with one discriminator step per generator step.
    pub fn new(layout: Layout, rank: usize, lambda: f64, eta: f64, epochs: usize) -> Self {
        Self {
            lambda,
            eta_g: eta,
            eta_d: eta,
            eta_p: eta,
            epochs,
            disc_steps: 1,
            noise_sigma: 0.0,
            seed: 0,
            reg_mode: RegularizerMode::Exact,
            layout,
            rank,
            initial: InitialState::Zero,
            angle_init: AngleInit::Random,
            theta_gradient: ThetaGradient::Exact,
            disc_gradient: DiscriminatorGradient::FrechetExact,
            stop_at_fidelity: None,
            record_wall_time: false,
            execution: Execution::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lambda", self.lambda),
            ("eta_g", self.eta_g),
            ("eta_d", self.eta_d),
            ("eta_p", self.eta_p),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "noise sigma must be non-negative, got {}",
                self.noise_sigma
            )));
        }
        if self.rank == 0 {
            return Err(Error::InvalidArgument("rank must be at least 1".into()));
        }
        if self.disc_steps == 0 {
            return Err(Error::InvalidArgument(
                "disc_steps must be at least 1".into(),
            ));
        }
        self.initial.density(self.layout.qubits())?;
        Ok(())
    }

    /// The generator at epoch 0, drawing from `rng` when angles are random.
    pub fn initial_generator<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<GeneratorEnsemble> {
        match self.angle_init {
            AngleInit::Random => {
                GeneratorEnsemble::random(&self.layout, self.rank, self.initial.clone(), rng)
            }
            AngleInit::Zero => {
                let circuits = (0..self.rank).map(|_| self.layout.zero_circuit()).collect();
                GeneratorEnsemble::new(vec![0.0; self.rank], circuits, self.initial.clone())
            }
        }
    }
}

/// Partial derivatives of the loss with respect to every parameter class.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientReport {
    pub d_logits: Vec<f64>,
    /// One vector per circuit, one entry per gate.
    pub d_theta: Vec<Vec<f64>>,
    pub d_alpha: Vec<f64>,
    pub d_beta: Vec<f64>,
}

impl GradientReport {
    fn values(&self) -> impl Iterator<Item = &f64> {
        self.d_logits
            .iter()
            .chain(self.d_theta.iter().flatten())
            .chain(&self.d_alpha)
            .chain(&self.d_beta)
    }

    pub fn is_finite(&self) -> bool {
        self.values().all(|v| v.is_finite())
    }

    pub fn norm(&self) -> f64 {
        self.values().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Gaussian perturbation of measured scalars; `σ = 0` is the identity and
/// draws nothing from the generator.
struct Noise<'a> {
    sigma: f64,
    rng: Option<&'a mut ChaCha8Rng>,
}

impl<'a> Noise<'a> {
    fn none() -> Self {
        Self {
            sigma: 0.0,
            rng: None,
        }
    }

    fn new(sigma: f64, rng: &'a mut ChaCha8Rng) -> Self {
        Self {
            sigma,
            rng: Some(rng),
        }
    }

    fn apply(&mut self, value: f64) -> f64 {
        match &mut self.rng {
            Some(rng) if self.sigma > 0.0 => noisy_expectation(value, self.sigma, *rng),
            _ => value,
        }
    }
}

/// `value + N(0, σ²)`.
pub fn noisy_expectation<R: Rng + ?Sized>(value: f64, sigma: f64, rng: &mut R) -> f64 {
    if sigma == 0.0 {
        return value;
    }
    let normal = Normal::new(0.0, sigma).expect("sigma is finite and non-negative");
    value + normal.sample(rng)
}

fn check_target(g: &GeneratorEnsemble, q: &DensityMatrix, dv: &DualVariables) -> Result<()> {
    for found in [q.dim(), dv.dim()] {
        if found != g.dim() {
            return Err(Error::DimensionMismatch {
                expected: g.dim(),
                found,
            });
        }
    }
    Ok(())
}

/// `O = φ + W`: the loss is `−Tr(PO)` plus terms independent of `P`.
fn generator_observable(dv: &DualVariables, reg: &Regularizer, q: &ComplexMatrix) -> ComplexMatrix {
    &dv.phi().dense() + &reg.observable_x(q)
}

fn logits_from_components(g: &GeneratorEnsemble, o: &ComplexMatrix, noise: &mut Noise) -> Vec<f64> {
    let probs = g.probabilities();
    let dp: Vec<f64> = g
        .component_states()
        .iter()
        .map(|rho| -noise.apply(rho.trace_product(o).re))
        .collect();
    let mean: f64 = probs.iter().zip(&dp).map(|(p, d)| p * d).sum();
    probs.iter().zip(&dp).map(|(p, d)| p * (d - mean)).collect()
}

/// `∂Tr(UρU†O)/∂θ_k` for every gate of `circuit`, by one backward sweep.
fn circuit_sweep(
    circuit: &Circuit,
    rho0: &ComplexMatrix,
    o: &ComplexMatrix,
    method: ThetaGradient,
    noise: &mut Noise,
) -> Vec<f64> {
    let gates = circuit.compiled();
    let mut rho = gates
        .iter()
        .fold(rho0.clone(), |m, g| g.conjugate(&m, false));
    let mut obs = o.clone();
    let mut out = vec![0.0; gates.len()];
    let half_i = Complex::new(0.0, 0.5);
    for (k, g) in gates.iter().enumerate().rev() {
        match method {
            ThetaGradient::Exact => {
                let sr = g.pauli.left_mul(&rho);
                let so = g.pauli.left_mul(&obs);
                let v = half_i * (sr.trace_product(&obs) - so.trace_product(&rho));
                out[k] = noise.apply(v.re);
                rho = g.conjugate(&rho, true);
            }
            ThetaGradient::ParameterShift => {
                rho = g.conjugate(&rho, true);
                let angle = circuit.gates()[k].angle();
                let plus = CompiledRotation::new(g.pauli, angle + FRAC_PI_2).conjugate(&rho, false);
                let minus =
                    CompiledRotation::new(g.pauli, angle - FRAC_PI_2).conjugate(&rho, false);
                let lp = noise.apply(plus.trace_product(&obs).re);
                let lm = noise.apply(minus.trace_product(&obs).re);
                out[k] = 0.5 * (lp - lm);
            }
        }
        obs = g.conjugate(&obs, true);
    }
    out
}

fn theta_from_observable(
    g: &GeneratorEnsemble,
    o: &ComplexMatrix,
    method: ThetaGradient,
    noise: &mut Noise,
) -> Vec<Vec<f64>> {
    let rho0 = g.initial_matrix();
    let probs = g.probabilities();
    g.circuits()
        .iter()
        .zip(&probs)
        .map(|(c, p)| {
            circuit_sweep(c, &rho0, o, method, noise)
                .into_iter()
                .map(|v| -p * v)
                .collect()
        })
        .collect()
}

/// `∂L/∂z` for the mixture logits `z`, chained through the softmax.
pub fn grad_logits(
    g: &GeneratorEnsemble,
    q: &DensityMatrix,
    dv: &DualVariables,
    mode: RegularizerMode,
) -> Result<Vec<f64>> {
    check_target(g, q, dv)?;
    let reg = Regularizer::new(dv, mode)?;
    let o = generator_observable(dv, &reg, q.matrix());
    Ok(logits_from_components(g, &o, &mut Noise::none()))
}

/// `∂L/∂θ` for every gate of every circuit, by the product rule.
pub fn grad_theta_exact(
    g: &GeneratorEnsemble,
    q: &DensityMatrix,
    dv: &DualVariables,
    mode: RegularizerMode,
) -> Result<Vec<Vec<f64>>> {
    grad_theta(g, q, dv, mode, ThetaGradient::Exact)
}

/// `∂L/∂θ` by the parameter-shift rule, exact for Pauli-rotation generators.
pub fn grad_theta_shift(
    g: &GeneratorEnsemble,
    q: &DensityMatrix,
    dv: &DualVariables,
    mode: RegularizerMode,
) -> Result<Vec<Vec<f64>>> {
    grad_theta(g, q, dv, mode, ThetaGradient::ParameterShift)
}

pub fn grad_theta(
    g: &GeneratorEnsemble,
    q: &DensityMatrix,
    dv: &DualVariables,
    mode: RegularizerMode,
    method: ThetaGradient,
) -> Result<Vec<Vec<f64>>> {
    check_target(g, q, dv)?;
    let reg = Regularizer::new(dv, mode)?;
    let o = generator_observable(dv, &reg, q.matrix());
    Ok(theta_from_observable(g, &o, method, &mut Noise::none()))
}

/// `(∂L/∂α, ∂L/∂β)` over the terms of `dv`.
pub fn grad_discriminator(
    p: &DensityMatrix,
    q: &DensityMatrix,
    dv: &DualVariables,
    mode: RegularizerMode,
    method: DiscriminatorGradient,
) -> Result<(Vec<f64>, Vec<f64>)> {
    for found in [p.dim(), q.dim()] {
        if found != dv.dim() {
            return Err(Error::DimensionMismatch {
                expected: dv.dim(),
                found,
            });
        }
    }
    let reg = Regularizer::new(dv, mode)?;
    discriminator_with(
        p.matrix(),
        q.matrix(),
        &reg,
        method,
        Execution::default(),
        &mut Noise::none(),
    )
}

fn discriminator_with(
    p: &ComplexMatrix,
    q: &ComplexMatrix,
    reg: &Regularizer,
    method: DiscriminatorGradient,
    exec: Execution,
    noise: &mut Noise,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let dv = reg.dual_variables();
    let phi_strings = dv.phi().strings();
    let psi_strings = dv.psi().strings();
    let (reg_a, reg_b) = match method {
        DiscriminatorGradient::FrechetExact => match reg.gradient_matrices(p, q) {
            Some((g_phi, g_psi)) => (
                trace_projections(&g_phi, &phi_strings, exec),
                trace_projections(&g_psi, &psi_strings, exec),
            ),
            None => reg.coefficient_gradients(p, q)?,
        },
        DiscriminatorGradient::CommutingForm => {
            let inv = 1.0 / dv.lambda();
            let wa = reg.observable_x(q).matmul(p).scale_real(-inv);
            let wb = reg.observable_y(p).matmul(q).scale_real(inv);
            (
                trace_projections(&wa, &phi_strings, exec),
                trace_projections(&wb, &psi_strings, exec),
            )
        }
    };
    let tp = trace_projections(p, &phi_strings, exec);
    let tq = trace_projections(q, &psi_strings, exec);
    let d_alpha = tp
        .iter()
        .zip(&reg_a)
        .map(|(t, r)| -noise.apply(*t) - noise.apply(*r))
        .collect();
    let d_beta = tq
        .iter()
        .zip(&reg_b)
        .map(|(t, r)| noise.apply(*t) - noise.apply(*r))
        .collect();
    Ok((d_alpha, d_beta))
}

/// All partial derivatives with the default exact methods.
pub fn full_gradient(
    g: &GeneratorEnsemble,
    q: &DensityMatrix,
    dv: &DualVariables,
    mode: RegularizerMode,
) -> Result<GradientReport> {
    check_target(g, q, dv)?;
    let reg = Regularizer::new(dv, mode)?;
    let o = generator_observable(dv, &reg, q.matrix());
    let p = g.generate_state();
    let mut none = Noise::none();
    let (d_alpha, d_beta) = discriminator_with(
        p.matrix(),
        q.matrix(),
        &reg,
        DiscriminatorGradient::FrechetExact,
        Execution::default(),
        &mut none,
    )?;
    Ok(GradientReport {
        d_logits: logits_from_components(g, &o, &mut none),
        d_theta: theta_from_observable(g, &o, ThetaGradient::Exact, &mut none),
        d_alpha,
        d_beta,
    })
}

/// Loss of the generator's current output.
pub fn generator_loss(
    g: &GeneratorEnsemble,
    q: &DensityMatrix,
    dv: &DualVariables,
    mode: RegularizerMode,
) -> Result<f64> {
    crate::wasserstein::gan_loss(&g.generate_state(), q, dv, mode)
}

/// One row of a run history.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub fidelity: f64,
    pub wall_ms: f64,
}

/// Per-epoch progress and the final parameters of a run.
#[derive(Clone, Debug)]
pub struct RunHistory {
    pub records: Vec<EpochRecord>,
    pub generator: GeneratorEnsemble,
    pub dual: DualVariables,
    pub seed: u64,
    pub reg_mode: RegularizerMode,
}

#[derive(Serialize)]
struct ParamsFile<'a> {
    seed: u64,
    lambda: f64,
    reg_mode: String,
    epochs_run: usize,
    final_fidelity: f64,
    layout: &'a str,
    logits: &'a [f64],
    probabilities: Vec<f64>,
    angles: Vec<Vec<f64>>,
    axes: Vec<Vec<String>>,
    targets: Vec<Vec<Vec<usize>>>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl RunHistory {
    pub fn final_record(&self) -> Option<&EpochRecord> {
        self.records.last()
    }

    pub fn final_fidelity(&self) -> f64 {
        self.final_record().map_or(f64::NAN, |r| r.fidelity)
    }

    pub fn max_fidelity(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.fidelity)
            .fold(f64::NAN, f64::max)
    }

    /// First epoch whose recorded fidelity is at least `threshold`.
    pub fn epochs_to_fidelity(&self, threshold: f64) -> Option<usize> {
        self.records
            .iter()
            .find(|r| r.fidelity >= threshold)
            .map(|r| r.epoch)
    }

    /// `epoch,loss,fidelity,wall_ms` with one row per record.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,loss,fidelity,wall_ms\n");
        for r in &self.records {
            writeln!(out, "{},{},{},{}", r.epoch, r.loss, r.fidelity, r.wall_ms)
                .expect("write to string");
        }
        out
    }

    /// Final parameters as TOML.
    pub fn params_toml(&self, layout_name: &str) -> String {
        let g = &self.generator;
        let file = ParamsFile {
            seed: self.seed,
            lambda: self.dual.lambda(),
            reg_mode: self.reg_mode.to_string(),
            epochs_run: self.final_record().map_or(0, |r| r.epoch),
            final_fidelity: self.final_fidelity(),
            layout: layout_name,
            logits: g.logits(),
            probabilities: g.probabilities(),
            angles: g.circuits().iter().map(Circuit::angles).collect(),
            axes: g
                .circuits()
                .iter()
                .map(|c| {
                    c.gates()
                        .iter()
                        .map(|gate| gate.template().axis_string())
                        .collect()
                })
                .collect(),
            targets: g
                .circuits()
                .iter()
                .map(|c| {
                    c.gates()
                        .iter()
                        .map(|gate| gate.targets().to_vec())
                        .collect()
                })
                .collect(),
            alpha: self.dual.alpha(),
            beta: self.dual.beta(),
        };
        toml::to_string(&file).expect("plain data serializes")
    }
}

fn abort(epoch: usize, reason: impl Into<String>) -> Error {
    Error::TrainingAborted {
        epoch,
        reason: reason.into(),
    }
}

fn ascend(dv: &mut DualVariables, d_alpha: &[f64], d_beta: &[f64], eta: f64) -> Result<()> {
    let alpha: Vec<f64> = dv
        .alpha()
        .iter()
        .zip(d_alpha)
        .map(|(a, g)| a + eta * g)
        .collect();
    let beta: Vec<f64> = dv
        .beta()
        .iter()
        .zip(d_beta)
        .map(|(b, g)| b + eta * g)
        .collect();
    dv.set_alpha(&alpha)?;
    dv.set_beta(&beta)
}

/// Alternating gradient training of a generator ensemble against `target`.
///
/// Every epoch records `(loss, fidelity)` for the current parameters, then
/// takes `disc_steps` ascent steps on the discriminator and one descent step
/// on the generator. A final record follows the last update. Fidelity and
/// the recorded loss are noiseless; noise perturbs only the gradients.
pub fn train(config: &TrainingConfig, target: &DensityMatrix) -> Result<RunHistory> {
    config.validate()?;
    let n = config.layout.qubits();
    if target.dim() != 1 << n {
        return Err(Error::DimensionMismatch {
            expected: 1 << n,
            found: target.dim(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut g = config.initial_generator(&mut rng)?;
    let mut dv = DualVariables::zeros(n, config.lambda)?;
    let q = target.matrix();
    let start = Instant::now();
    let mut records = Vec::with_capacity(config.epochs + 1);
    let mode = config.reg_mode;

    let mut reg = Regularizer::new(&dv, mode).map_err(|e| abort(0, e.to_string()))?;
    for epoch in 0..=config.epochs {
        let p = g.generate_state();
        let loss = loss_with(p.matrix(), q, &dv, &reg);
        if !loss.is_finite() {
            return Err(abort(epoch, format!("loss is {loss}")));
        }
        let fid = fidelity(&p, target).map_err(|e| abort(epoch, e.to_string()))?;
        let wall_ms = match config.record_wall_time {
            true => start.elapsed().as_secs_f64() * 1e3,
            false => 0.0,
        };
        records.push(EpochRecord {
            epoch,
            loss,
            fidelity: fid,
            wall_ms,
        });
        let reached = config.stop_at_fidelity.is_some_and(|t| fid >= t);
        if epoch == config.epochs || reached {
            break;
        }

        let mut noise = Noise::new(config.noise_sigma, &mut rng);
        for _ in 0..config.disc_steps {
            let (da, db) = discriminator_with(
                p.matrix(),
                q,
                &reg,
                config.disc_gradient,
                config.execution,
                &mut noise,
            )?;
            ascend(&mut dv, &da, &db, config.eta_d).map_err(|e| abort(epoch, e.to_string()))?;
            reg = Regularizer::new(&dv, mode).map_err(|e| abort(epoch, e.to_string()))?;
        }
        let o = generator_observable(&dv, &reg, q);
        let d_logits = logits_from_components(&g, &o, &mut noise);
        let d_theta = theta_from_observable(&g, &o, config.theta_gradient, &mut noise);
        if g.rank() > 1 {
            let z: Vec<f64> = g
                .logits()
                .iter()
                .zip(&d_logits)
                .map(|(z, d)| z - config.eta_p * d)
                .collect();
            g.set_logits(&z).map_err(|e| abort(epoch, e.to_string()))?;
        }
        let angles: Vec<f64> = g
            .flat_angles()
            .iter()
            .zip(d_theta.iter().flatten())
            .map(|(a, d)| a - config.eta_g * d)
            .collect();
        g.set_flat_angles(&angles)
            .map_err(|e| abort(epoch, e.to_string()))?;
    }

    Ok(RunHistory {
        records,
        generator: g,
        dual: dv,
        seed: config.seed,
        reg_mode: mode,
    })
}

/// Trains one run per seed, in parallel under `exec`. Results keep seed order.
pub fn train_seeds(
    config: &TrainingConfig,
    target: &DensityMatrix,
    seeds: &[u64],
    exec: Execution,
) -> Vec<Result<RunHistory>> {
    map_indexed(exec, seeds.len(), |i| {
        let mut c = config.clone();
        c.seed = seeds[i];
        c.execution = Execution::Sequential;
        train(&c, target)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{Pauli, PauliString, RotationGate};

    fn instance(
        n: usize,
        rank: usize,
        seed: u64,
    ) -> (GeneratorEnsemble, DensityMatrix, DualVariables) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layout = Layout::generic(n, 1).unwrap();
        let mut g = GeneratorEnsemble::random(&layout, rank, InitialState::Zero, &mut rng).unwrap();
        let z: Vec<f64> = (0..rank).map(|_| rng.gen_range(-1.0..1.0)).collect();
        g.set_logits(&z).unwrap();
        let q = crate::qcore::random::random_density(1 << n, 2, &mut rng);
        let k = 1 << (2 * n);
        let a: Vec<f64> = (0..k).map(|_| rng.gen_range(-0.3..0.3)).collect();
        let b: Vec<f64> = (0..k).map(|_| rng.gen_range(-0.3..0.3)).collect();
        (
            g,
            q,
            DualVariables::from_coefficients(n, &a, &b, 1.5).unwrap(),
        )
    }

    #[test]
    fn single_logit_has_zero_gradient() {
        let (g, q, dv) = instance(1, 1, 1);
        assert_eq!(
            grad_logits(&g, &q, &dv, RegularizerMode::Exact).unwrap(),
            vec![0.0]
        );
    }

    #[test]
    fn identical_circuits_have_zero_logit_gradient() {
        let (g, q, dv) = instance(1, 1, 2);
        let c = g.circuits()[0].clone();
        let g2 = GeneratorEnsemble::new(vec![0.3, -0.2], vec![c.clone(), c], InitialState::Zero)
            .unwrap();
        let d = grad_logits(&g2, &q, &dv, RegularizerMode::Exact).unwrap();
        assert!(d.iter().all(|v| v.abs() < 1e-14), "{d:?}");
    }

    #[test]
    fn shift_matches_exact() {
        for seed in 0..5 {
            let (g, q, dv) = instance(2, 2, seed);
            let a = grad_theta_exact(&g, &q, &dv, RegularizerMode::Exact).unwrap();
            let b = grad_theta_shift(&g, &q, &dv, RegularizerMode::Exact).unwrap();
            for (x, y) in a.iter().flatten().zip(b.iter().flatten()) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn rx_derivative_against_z() {
        let theta = 0.83;
        let c = Circuit::new(1, vec![RotationGate::single(0, Pauli::X, theta).unwrap()]).unwrap();
        let rho0 = InitialState::Zero.density(1).unwrap();
        let z = PauliString::single(1, 0, Pauli::Z).unwrap().matrix();
        for method in [ThetaGradient::Exact, ThetaGradient::ParameterShift] {
            let d = circuit_sweep(&c, &rho0, &z, method, &mut Noise::none());
            assert!((d[0] + theta.sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn noise_is_identity_at_zero_sigma() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(noisy_expectation(0.25, 0.0, &mut rng), 0.25);
        let a = noisy_expectation(0.25, 0.1, &mut ChaCha8Rng::seed_from_u64(4));
        let b = noisy_expectation(0.25, 0.1, &mut ChaCha8Rng::seed_from_u64(4));
        assert_eq!(a, b);
        assert_ne!(a, 0.25);
    }
}
