//! Command orchestration and artifact export.

use std::fs;
use std::path::{Path, PathBuf};

use qwgan::circuit::{angles_to_csv, random_target, Circuit, Layout};
use qwgan::hamsim::{
    avg_output_fidelity, compress_circuit, exact_evolution, heisenberg_hamiltonian,
    worst_case_error, HeisenbergSpec, TrotterPlan,
};
use qwgan::parallel::Execution;
use qwgan::pauli::{PauliObservable, PauliString, RotationGate};
use qwgan::qcore::{mat_exp_i_herm, ComplexMatrix};
use qwgan::trainer::{train_seeds, RunHistory};
use qwgan::wasserstein::{
    dual_objective, make_feasible, maximize_regularized_dual, qw_primal, qw_pure_closed_form,
    CouplingProblem, DualSolveOptions, DualVariables,
};
use serde::Serialize;

use crate::config::{Command, CompressTarget, ExperimentConfig};
use crate::error::CliError;
use crate::gradcheck::run_grad_check;
use crate::state_file::load_state;

/// Command-line overrides applied on top of a config file.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub long: bool,
    /// Worker threads for seed sweeps; `None` uses every core.
    pub workers: Option<usize>,
}

/// Human-readable lines describing what a run produced.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub lines: Vec<String>,
}

impl Report {
    fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn with_workers<T: Send>(
    workers: Option<usize>,
    f: impl FnOnce(Execution) -> T + Send,
) -> Result<T, CliError> {
    #[cfg(feature = "parallel")]
    {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(w) = workers {
            builder = builder.num_threads(w);
        }
        let pool = builder
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {workers:?} workers: {e}")))?;
        Ok(pool.install(|| f(Execution::Parallel)))
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        Ok(f(Execution::Sequential))
    }
}

/// Runs `config` and writes its artifacts under the output directory.
pub fn run(config: &ExperimentConfig, opts: &RunOptions) -> Result<Report, CliError> {
    if config.long && !opts.long {
        return Err(CliError::Usage(format!(
            "{} on {} qubits is a long run; pass --long to start it",
            config.command.name(),
            config.qubits
        )));
    }
    if opts.workers == Some(0) {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }
    let mut config = config.clone();
    if let Some(s) = opts.seed {
        config.seed = s;
    }
    if let Some(o) = &opts.out {
        config.out = o.clone();
    }
    fs::create_dir_all(&config.out).map_err(|e| CliError::io(&config.out, e))?;
    match config.command {
        Command::TrainPure | Command::TrainMixed | Command::TrainNoisy => {
            run_training(&config, opts)
        }
        Command::CompressCircuit => run_compress(&config, opts),
        Command::QwEval => run_qw_eval(&config),
        Command::GradCheck => run_gradcheck(&config),
    }
}

/// Per-epoch fidelity band across runs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BandRow {
    pub epoch: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

/// Mean, minimum and maximum fidelity per epoch. A run that stopped early
/// holds its last fidelity for the remaining epochs.
pub fn fidelity_band(histories: &[RunHistory]) -> Vec<BandRow> {
    let len = histories.iter().map(|h| h.records.len()).max().unwrap_or(0);
    (0..len)
        .map(|e| {
            let f: Vec<f64> = histories
                .iter()
                .filter_map(|h| h.records.get(e).or(h.records.last()).map(|r| r.fidelity))
                .collect();
            BandRow {
                epoch: e,
                mean: f.iter().sum::<f64>() / f.len() as f64,
                min: f.iter().copied().fold(f64::INFINITY, f64::min),
                max: f.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            }
        })
        .collect()
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Serialize)]
struct SeedSummary {
    seed: u64,
    epochs_run: usize,
    final_fidelity: f64,
    max_fidelity: f64,
    epochs_to_threshold: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    avg_output_fidelity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    worst_case_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gates: Option<usize>,
}

#[derive(Serialize)]
struct Summary<'a> {
    command: &'a str,
    qubits: usize,
    rank: usize,
    layout: &'a str,
    lambda: f64,
    eta_g: f64,
    eta_d: f64,
    eta_p: f64,
    noise_sigma: f64,
    reg_mode: String,
    target_seed: u64,
    threshold: f64,
    runs: usize,
    reached: usize,
    mean_final_fidelity: f64,
    seeds: Vec<SeedSummary>,
}

fn summary<'a>(config: &'a ExperimentConfig, seeds: Vec<SeedSummary>) -> Summary<'a> {
    let t = &config.training;
    Summary {
        command: config.command.name(),
        qubits: config.qubits,
        rank: config.rank,
        layout: &config.layout,
        lambda: t.lambda,
        eta_g: t.eta_g,
        eta_d: t.eta_d,
        eta_p: t.eta_p,
        noise_sigma: t.noise_sigma,
        reg_mode: t.reg_mode.to_string(),
        target_seed: config.target_seed,
        threshold: config.threshold,
        runs: seeds.len(),
        reached: seeds
            .iter()
            .filter(|s| s.epochs_to_threshold.is_some())
            .count(),
        mean_final_fidelity: seeds.iter().map(|s| s.final_fidelity).sum::<f64>()
            / seeds.len() as f64,
        seeds,
    }
}

fn seed_summary(h: &RunHistory, threshold: f64) -> SeedSummary {
    SeedSummary {
        seed: h.seed,
        epochs_run: h.final_record().map_or(0, |r| r.epoch),
        final_fidelity: h.final_fidelity(),
        max_fidelity: h.max_fidelity(),
        epochs_to_threshold: h.epochs_to_fidelity(threshold),
        avg_output_fidelity: None,
        worst_case_error: None,
        gates: None,
    }
}

fn collect(
    results: Vec<qwgan::Result<RunHistory>>,
    seeds: &[u64],
) -> Result<Vec<RunHistory>, CliError> {
    results
        .into_iter()
        .zip(seeds)
        .map(|(r, &seed)| r.map_err(|source| CliError::Seed { seed, source }))
        .collect()
}

fn write_histories(out: &Path, histories: &[RunHistory], layout: &str) -> Result<(), CliError> {
    for h in histories {
        write(&out.join(format!("seed_{}.csv", h.seed)), &h.to_csv())?;
        write(
            &out.join(format!("seed_{}.params.toml", h.seed)),
            &h.params_toml(layout),
        )?;
    }
    Ok(())
}

fn finish(
    config: &ExperimentConfig,
    histories: &[RunHistory],
    seeds: Vec<SeedSummary>,
    report: &mut Report,
) -> Result<(), CliError> {
    let band = fidelity_band(histories);
    write(&config.out.join("summary.csv"), &to_csv(&band)?)?;
    let s = summary(config, seeds);
    let text = toml::to_string(&s).map_err(|e| CliError::Usage(e.to_string()))?;
    write(&config.out.join("summary.toml"), &text)?;
    report.line(format!(
        "{}/{} runs reached fidelity {}; mean final fidelity {:.6}",
        s.reached, s.runs, config.threshold, s.mean_final_fidelity
    ));
    report.line(format!("wrote {}", config.out.display()));
    Ok(())
}

fn run_training(config: &ExperimentConfig, opts: &RunOptions) -> Result<Report, CliError> {
    let (target, _) = random_target(&config.training.layout, config.rank, config.target_seed)?;
    let seeds = config.seeds();
    let results = with_workers(opts.workers, |exec| {
        train_seeds(&config.training, &target, &seeds, exec)
    })?;
    let histories = collect(results, &seeds)?;
    write_histories(&config.out, &histories, &config.layout)?;

    let mut report = Report::default();
    let mut rows = Vec::new();
    for h in &histories {
        let s = seed_summary(h, config.threshold);
        report.line(format!(
            "seed {}: final fidelity {:.6}, reached {} at {}",
            h.seed,
            s.final_fidelity,
            config.threshold,
            s.epochs_to_threshold
                .map_or("never".into(), |e| format!("epoch {e}"))
        ));
        rows.push(s);
    }
    finish(config, &histories, rows, &mut report)?;
    Ok(report)
}

/// The unitary a compression run approximates, with a product-formula plan
/// when the target is a Hamiltonian evolution.
pub fn compress_unitary(
    target: &CompressTarget,
    qubits: usize,
) -> Result<(ComplexMatrix, Option<TrotterPlan>), CliError> {
    match target {
        CompressTarget::Heisenberg {
            field,
            time,
            seed,
            boundary,
        } => {
            let mut spec = HeisenbergSpec::new(qubits, *field, *time, *seed);
            spec.boundary = *boundary;
            let h = heisenberg_hamiltonian(&spec)?;
            let mut plan = TrotterPlan::new(1, h.len(), *time, 1e-3)?;
            plan.term_order = h.terms().iter().map(|(_, s)| s.to_string()).collect();
            Ok((exact_evolution(&spec)?, Some(plan)))
        }
        CompressTarget::Hamiltonian { terms, time } => {
            let h: PauliObservable = terms
                .parse()
                .map_err(|e| CliError::Usage(format!("compress.hamiltonian: {e}")))?;
            if h.qubits() != qubits {
                return Err(CliError::Usage(format!(
                    "compress.hamiltonian acts on {} qubits, config has {qubits}",
                    h.qubits()
                )));
            }
            let mut plan = TrotterPlan::new(1, h.len(), *time, 1e-3)?;
            plan.term_order = h.terms().iter().map(|(_, s)| s.to_string()).collect();
            Ok((mat_exp_i_herm(&h.dense(), *time)?, Some(plan)))
        }
        CompressTarget::Rotation { axis, angle } => {
            let s: PauliString = axis
                .parse()
                .map_err(|e| CliError::Usage(format!("compress.axis: {e}")))?;
            let c = Circuit::new(qubits, vec![RotationGate::from_string(&s, *angle)?])?;
            Ok((c.unitary(), None))
        }
    }
}

fn run_compress(config: &ExperimentConfig, opts: &RunOptions) -> Result<Report, CliError> {
    let target = config
        .compress
        .as_ref()
        .expect("parse_config requires [compress]");
    let (u0, plan) = compress_unitary(target, config.qubits)?;
    let layout = &config.training.layout;
    let seeds = config.seeds();
    let results = with_workers(opts.workers, |exec| {
        qwgan::parallel::map_slice(exec, &seeds, |&s| {
            let mut c = config.training.clone();
            c.seed = s;
            c.execution = Execution::Sequential;
            compress_circuit(&u0, layout, &c)
        })
    })?;

    let mut report = Report::default();
    let mut histories = Vec::new();
    let mut rows = Vec::new();
    for (r, s) in results.into_iter().zip(&seeds) {
        let (u1, h) = r.map_err(|source| CliError::Seed { seed: *s, source })?;
        let unitary = u1.unitary();
        let avg = avg_output_fidelity(&u0, &unitary)?;
        let worst = worst_case_error(&u0, &unitary)?;
        let learned = Layout::from_circuit(format!("learned_seed_{s}"), &u1)?;
        write(
            &config.out.join(format!("seed_{s}.layout.toml")),
            &learned.to_toml(),
        )?;
        write(
            &config.out.join(format!("seed_{s}.angles.csv")),
            &angles_to_csv(std::slice::from_ref(&u1)),
        )?;
        report.line(format!(
            "seed {s}: {} gates, average output fidelity {avg:.6}, worst-case error {worst:.4}",
            u1.len()
        ));
        let mut row = seed_summary(&h, config.threshold);
        row.avg_output_fidelity = Some(avg);
        row.worst_case_error = Some(worst);
        row.gates = Some(u1.len());
        rows.push(row);
        histories.push(h);
    }
    write_histories(&config.out, &histories, &config.layout)?;
    if let Some(plan) = plan {
        let text = toml::to_string(&plan).map_err(|e| CliError::Usage(e.to_string()))?;
        write(&config.out.join("trotter_plan.toml"), &text)?;
        report.line(format!(
            "second-order product formula at error 1e-3: {} steps x {} gates = {} gates",
            plan.steps, plan.gates_per_step, plan.total_gates
        ));
    }
    finish(config, &histories, rows, &mut report)?;
    Ok(report)
}

#[derive(Serialize)]
struct QwEvalRecord {
    primal: f64,
    regularized_dual: f64,
    dual_lambda: f64,
    dual_converged: bool,
    feasible_dual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    closed_form: Option<f64>,
}

fn run_qw_eval(config: &ExperimentConfig) -> Result<Report, CliError> {
    let settings = config
        .qw_eval
        .as_ref()
        .expect("parse_config requires [qw_eval]");
    let p = load_state(&settings.p)?;
    let q = load_state(&settings.q)?;
    let (pd, qd) = (p.density(), q.density());
    let primal = qw_primal(&CouplingProblem::new(pd.clone(), qd.clone())?)?;
    let n = pd.qubits().ok_or_else(|| {
        CliError::Usage(format!(
            "state dimension {} is not a power of two",
            pd.dim()
        ))
    })?;
    let start = DualVariables::zeros(n, settings.lambda)?;
    let dual = maximize_regularized_dual(&pd, &qd, &start, DualSolveOptions::default())?;
    let feasible = dual_objective(&pd, &qd, &make_feasible(&dual.dv)?, false)?.value;
    let closed_form = match (p.as_pure(), q.as_pure()) {
        (Some(u), Some(v)) => Some(qw_pure_closed_form(u, v)?),
        _ => None,
    };
    let record = QwEvalRecord {
        primal: primal.value,
        regularized_dual: dual.value,
        dual_lambda: settings.lambda,
        dual_converged: dual.converged,
        feasible_dual: feasible,
        closed_form,
    };
    let text = toml::to_string(&record).map_err(|e| CliError::Usage(e.to_string()))?;
    write(&config.out.join("qw_eval.toml"), &text)?;

    let mut report = Report::default();
    report.line(format!("primal qW: {:.10}", record.primal));
    report.line(format!(
        "regularized dual (lambda {}): {:.10}{}",
        settings.lambda,
        record.regularized_dual,
        if dual.converged {
            ""
        } else {
            " (not converged)"
        }
    ));
    report.line(format!(
        "feasible dual at that point: {:.10}",
        record.feasible_dual
    ));
    if let Some(c) = closed_form {
        report.line(format!("pure-state closed form: {c:.10}"));
    }
    Ok(report)
}

fn run_gradcheck(config: &ExperimentConfig) -> Result<Report, CliError> {
    let rows = run_grad_check(&config.grad_check, config.seed)?;
    write(&config.out.join("grad_check.csv"), &to_csv(&rows)?)?;
    let failed: Vec<_> = rows.iter().filter(|r| !r.passed).collect();
    let mut report = Report::default();
    report.line(format!(
        "{} comparisons over {} instances, {} failed",
        rows.len(),
        config.grad_check.instances,
        failed.len()
    ));
    if let Some(r) = failed.first() {
        return Err(CliError::CheckFailed(format!(
            "{} failures; first: instance {} {}[{}] analytic {} vs reference {}",
            failed.len(),
            r.instance,
            r.kind,
            r.index,
            r.analytic,
            r.reference
        )));
    }
    Ok(report)
}
