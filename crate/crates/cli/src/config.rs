//! Experiment configuration files.
//!
//! A config is TOML with a handful of top-level keys and one optional table
//! per concern:
//!
//! ```toml
//! command = "train-pure"
//! qubits = 2
//! repeats = 10
//! out = "runs/pure-2q"
//!
//! [training]
//! epochs = 500
//! ```
//!
//! Unknown keys are rejected. Anything left out is filled from the
//! hyperparameter tables of the original experiments: `λ = 2` for pure
//! states on one or two qubits and `λ = 10` otherwise, `η = 0.1` except for
//! registers of eight or more qubits where it is `0.01`.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use qwgan::circuit::Layout;
use qwgan::hamsim::Boundary;
use qwgan::trainer::{AngleInit, DiscriminatorGradient, ThetaGradient, TrainingConfig};
use qwgan::wasserstein::RegularizerMode;
use serde::Deserialize;

use crate::error::CliError;

/// Registers at or above this size train with the split regularizer by default.
pub const RELAXED_FROM_QUBITS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    TrainPure,
    TrainMixed,
    TrainNoisy,
    CompressCircuit,
    QwEval,
    GradCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::TrainPure => "train-pure",
            Command::TrainMixed => "train-mixed",
            Command::TrainNoisy => "train-noisy",
            Command::CompressCircuit => "compress-circuit",
            Command::QwEval => "qw-eval",
            Command::GradCheck => "grad-check",
        }
    }

    fn is_training(self) -> bool {
        matches!(
            self,
            Command::TrainPure | Command::TrainMixed | Command::TrainNoisy
        )
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    command: Option<Command>,
    qubits: Option<usize>,
    rank: Option<usize>,
    layout: Option<String>,
    depth: Option<usize>,
    repeats: Option<usize>,
    seed: Option<u64>,
    target_seed: Option<u64>,
    threshold: Option<f64>,
    out: Option<PathBuf>,
    long: Option<bool>,
    #[serde(default)]
    training: RawTraining,
    compress: Option<RawCompress>,
    qw_eval: Option<RawQwEval>,
    grad_check: Option<RawGradCheck>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTraining {
    lambda: Option<f64>,
    eta: Option<f64>,
    eta_g: Option<f64>,
    eta_d: Option<f64>,
    eta_p: Option<f64>,
    epochs: Option<usize>,
    disc_steps: Option<usize>,
    noise_sigma: Option<f64>,
    reg_mode: Option<String>,
    angle_init: Option<AngleInit>,
    theta_gradient: Option<ThetaGradient>,
    disc_gradient: Option<DiscriminatorGradient>,
    stop_at_fidelity: Option<f64>,
    record_wall_time: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCompress {
    target: TargetKind,
    field: Option<f64>,
    time: Option<f64>,
    hamiltonian_seed: Option<u64>,
    boundary: Option<String>,
    hamiltonian: Option<String>,
    axis: Option<String>,
    angle: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQwEval {
    p: PathBuf,
    q: PathBuf,
    lambda: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGradCheck {
    instances: Option<usize>,
    max_qubits: Option<usize>,
    step: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    /// Time evolution under the random-field Heisenberg chain.
    Heisenberg,
    /// Time evolution under an explicit Pauli-sum Hamiltonian.
    Hamiltonian,
    /// A single rotation `exp(iθσ/2)`.
    Rotation,
}

/// The unitary a `compress-circuit` run approximates.
#[derive(Clone, Debug, PartialEq)]
pub enum CompressTarget {
    Heisenberg {
        field: f64,
        time: f64,
        seed: u64,
        boundary: Boundary,
    },
    Hamiltonian {
        terms: String,
        time: f64,
    },
    Rotation {
        axis: String,
        angle: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct QwEvalSettings {
    pub p: PathBuf,
    pub q: PathBuf,
    pub lambda: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradCheckSettings {
    pub instances: usize,
    pub max_qubits: usize,
    pub step: f64,
}

/// A fully resolved experiment.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub command: Command,
    pub qubits: usize,
    pub rank: usize,
    pub layout: String,
    pub depth: usize,
    pub repeats: usize,
    /// Seed of the first run; run `i` uses `seed + i`.
    pub seed: u64,
    /// Seed of the hidden target parameters, shared by all runs.
    pub target_seed: u64,
    /// Fidelity counted as success in the summary.
    pub threshold: f64,
    pub out: PathBuf,
    /// Needs `--long` to run.
    pub long: bool,
    pub training: TrainingConfig,
    pub compress: Option<CompressTarget>,
    pub qw_eval: Option<QwEvalSettings>,
    pub grad_check: GradCheckSettings,
}

impl ExperimentConfig {
    /// Seeds of every repeat, in order.
    pub fn seeds(&self) -> Vec<u64> {
        (0..self.repeats as u64).map(|i| self.seed + i).collect()
    }

    /// Resolves relative state-file paths against `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        if let Some(q) = &mut self.qw_eval {
            for p in [&mut q.p, &mut q.q] {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
    }
}

fn missing(field: &str, command: Command) -> CliError {
    CliError::Usage(format!(
        "missing field `{field}` required by {}",
        command.name()
    ))
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("invalid value for `{field}`: {msg}"))
}

/// Regularization weight from the hyperparameter tables.
pub fn default_lambda(command: Command, register_qubits: usize) -> f64 {
    match command {
        Command::TrainMixed => 10.0,
        _ if register_qubits <= 2 => 2.0,
        _ => 10.0,
    }
}

/// Learning rate from the hyperparameter tables.
pub fn default_eta(register_qubits: usize) -> f64 {
    if register_qubits >= 8 {
        0.01
    } else {
        0.1
    }
}

fn default_epochs(command: Command, register_qubits: usize) -> usize {
    match (command, register_qubits) {
        (Command::TrainMixed, _) => 400,
        (_, 0..=1) => 300,
        (_, 2..=3) => 500,
        (_, 4..=7) => 1500,
        _ => 1800,
    }
}

fn positive(field: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(field, format!("{v} is not positive")))
    }
}

/// Parses and validates a config, filling every default.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    let raw: RawConfig =
        toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))?;
    let command = raw
        .command
        .ok_or_else(|| CliError::Usage("missing field `command`".into()))?;

    let qubits = match command {
        Command::QwEval | Command::GradCheck => raw.qubits.unwrap_or(1),
        _ => raw.qubits.ok_or_else(|| missing("qubits", command))?,
    };
    if qubits == 0 {
        return Err(invalid("qubits", "must be at least 1"));
    }
    let rank = raw.rank.unwrap_or(match command {
        Command::TrainMixed => 2,
        _ => 1,
    });
    if rank == 0 {
        return Err(invalid("rank", "must be at least 1"));
    }
    if command == Command::CompressCircuit && rank != 1 {
        return Err(invalid("rank", "compress-circuit trains a single circuit"));
    }
    let repeats = raw.repeats.unwrap_or(1);
    if repeats == 0 {
        return Err(invalid("repeats", "must be at least 1"));
    }
    let layout_name = raw.layout.unwrap_or_else(|| match command {
        Command::TrainNoisy => "ionq".into(),
        _ => "generic".into(),
    });
    let depth = raw.depth.unwrap_or(3);
    if depth == 0 {
        return Err(invalid("depth", "must be at least 1"));
    }
    let layout = Layout::by_name(&layout_name, qubits, depth).map_err(|e| invalid("layout", e))?;

    let register = match command {
        Command::CompressCircuit => 2 * qubits,
        _ => qubits,
    };
    let t = raw.training;
    let lambda = positive(
        "training.lambda",
        t.lambda.unwrap_or(default_lambda(command, register)),
    )?;
    let eta = positive("training.eta", t.eta.unwrap_or(default_eta(register)))?;
    let epochs = t.epochs.unwrap_or(default_epochs(command, register));
    let mut training = TrainingConfig::new(layout, rank, lambda, eta, epochs);
    training.eta_g = positive("training.eta_g", t.eta_g.unwrap_or(eta))?;
    training.eta_d = positive("training.eta_d", t.eta_d.unwrap_or(eta))?;
    training.eta_p = positive("training.eta_p", t.eta_p.unwrap_or(eta))?;
    training.disc_steps = t.disc_steps.unwrap_or(1);
    if training.disc_steps == 0 {
        return Err(invalid("training.disc_steps", "must be at least 1"));
    }
    training.noise_sigma = match (command, t.noise_sigma) {
        (_, Some(s)) if !(s >= 0.0) || !s.is_finite() => {
            return Err(invalid("training.noise_sigma", "must be non-negative"))
        }
        (_, Some(s)) => s,
        (Command::TrainNoisy, None) => return Err(missing("training.noise_sigma", command)),
        (_, None) => 0.0,
    };
    training.reg_mode = match t.reg_mode {
        Some(s) => RegularizerMode::from_str(&s).map_err(|e| invalid("training.reg_mode", e))?,
        None if register >= RELAXED_FROM_QUBITS => RegularizerMode::Relaxed,
        None => RegularizerMode::Exact,
    };
    training.angle_init = t.angle_init.unwrap_or_default();
    training.theta_gradient = t.theta_gradient.unwrap_or_default();
    training.disc_gradient = t.disc_gradient.unwrap_or_default();
    training.stop_at_fidelity = t.stop_at_fidelity;
    training.record_wall_time = t.record_wall_time.unwrap_or(false);

    let compress = match (command, raw.compress) {
        (Command::CompressCircuit, None) => return Err(missing("compress", command)),
        (Command::CompressCircuit, Some(c)) => Some(compress_target(c, qubits)?),
        _ => None,
    };
    let qw_eval = match (command, raw.qw_eval) {
        (Command::QwEval, None) => return Err(missing("qw_eval", command)),
        (Command::QwEval, Some(q)) => Some(QwEvalSettings {
            p: q.p,
            q: q.q,
            lambda: positive("qw_eval.lambda", q.lambda.unwrap_or(0.1))?,
        }),
        _ => None,
    };
    let gc = raw.grad_check.unwrap_or_default();
    let grad_check = GradCheckSettings {
        instances: gc.instances.unwrap_or(30),
        max_qubits: gc.max_qubits.unwrap_or(2),
        step: positive("grad_check.step", gc.step.unwrap_or(1e-5))?,
    };
    if !(1..=3).contains(&grad_check.max_qubits) {
        return Err(invalid("grad_check.max_qubits", "must be between 1 and 3"));
    }

    let threshold = raw.threshold.unwrap_or(match command {
        Command::TrainMixed => 0.98,
        Command::TrainNoisy => 0.95,
        Command::CompressCircuit => 0.999,
        _ => 0.99,
    });
    if !(0.0..=1.0).contains(&threshold) {
        return Err(invalid("threshold", "must lie in [0, 1]"));
    }

    let config = ExperimentConfig {
        command,
        qubits,
        rank,
        layout: layout_name,
        depth,
        repeats,
        seed: raw.seed.unwrap_or(0),
        target_seed: raw.target_seed.unwrap_or(1000),
        threshold,
        out: raw
            .out
            .unwrap_or_else(|| PathBuf::from("runs").join(command.name())),
        long: raw.long.unwrap_or(register >= RELAXED_FROM_QUBITS),
        training,
        compress,
        qw_eval,
        grad_check,
    };
    if command.is_training() || command == Command::CompressCircuit {
        config
            .training
            .validate()
            .map_err(|e| CliError::Usage(format!("training: {e}")))?;
    }
    Ok(config)
}

fn compress_target(c: RawCompress, qubits: usize) -> Result<CompressTarget, CliError> {
    let need = |field: &str| {
        CliError::Usage(format!(
            "missing field `compress.{field}` for target {:?}",
            c.target
        ))
    };
    Ok(match c.target {
        TargetKind::Heisenberg => {
            if qubits < 2 {
                return Err(invalid(
                    "qubits",
                    "the Heisenberg chain needs at least 2 qubits",
                ));
            }
            let boundary = match c.boundary.as_deref() {
                None | Some("periodic") => Boundary::Periodic,
                Some("open") => Boundary::Open,
                Some(other) => {
                    return Err(invalid(
                        "compress.boundary",
                        format!("\"{other}\" is neither periodic nor open"),
                    ))
                }
            };
            CompressTarget::Heisenberg {
                field: c.field.unwrap_or(1.0),
                time: c.time.ok_or_else(|| need("time"))?,
                seed: c.hamiltonian_seed.unwrap_or(0),
                boundary,
            }
        }
        TargetKind::Hamiltonian => CompressTarget::Hamiltonian {
            terms: c.hamiltonian.ok_or_else(|| need("hamiltonian"))?,
            time: c.time.ok_or_else(|| need("time"))?,
        },
        TargetKind::Rotation => {
            let axis = c.axis.ok_or_else(|| need("axis"))?;
            if axis.chars().count() != qubits {
                return Err(invalid(
                    "compress.axis",
                    format!("\"{axis}\" does not act on {qubits} qubits"),
                ));
            }
            CompressTarget::Rotation {
                axis,
                angle: c.angle.ok_or_else(|| need("angle"))?,
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_pure_configs_take_table_defaults() {
        let c = parse_config("command = \"train-pure\"\nqubits = 1\n").unwrap();
        assert_eq!(c.training.lambda, 2.0);
        assert_eq!(c.training.eta_g, 0.1);
        assert_eq!(c.repeats, 1);
        let c = parse_config("command = \"train-pure\"\nqubits = 4\n").unwrap();
        assert_eq!(c.training.lambda, 10.0);
        let c = parse_config("command = \"train-pure\"\nqubits = 8\n").unwrap();
        assert_eq!(c.training.eta_d, 0.01);
        assert_eq!(c.training.reg_mode, RegularizerMode::Relaxed);
        assert!(c.long);
    }

    #[test]
    fn mixed_defaults_to_rank_two() {
        let c = parse_config("command = \"train-mixed\"\nqubits = 1\n").unwrap();
        assert_eq!((c.rank, c.training.lambda, c.threshold), (2, 10.0, 0.98));
    }

    #[test]
    fn errors_name_the_problem() {
        let e = parse_config("command = \"train-pure\"\nqubits = 1\nbogus = 3\n").unwrap_err();
        assert!(e.to_string().contains("bogus"), "{e}");
        let e = parse_config("command = \"train-pure\"\n").unwrap_err();
        assert!(e.to_string().contains("qubits"), "{e}");
        let e = parse_config("command = \"train-pure\"\nqubits = 1\nthis line is broken\n")
            .unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
        let e = parse_config("command = \"train-noisy\"\nqubits = 4\n").unwrap_err();
        assert!(e.to_string().contains("noise_sigma"), "{e}");
        let e = parse_config("command = \"train-pure\"\nqubits = \"two\"\n").unwrap_err();
        assert!(e.to_string().contains("qubits"), "{e}");
    }
}
