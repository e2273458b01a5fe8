use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use qwgan_cli::{parse_config, run, CliError, RunOptions};

/// Run a quantum Wasserstein GAN experiment described by a TOML config.
#[derive(Parser, Debug)]
#[command(name = "qwgan", version)]
struct Args {
    /// Experiment config file.
    #[arg(long)]
    config: PathBuf,
    /// Seed of the first run, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Allow configs marked as long runs.
    #[arg(long)]
    long: bool,
    /// Worker threads for running seeds in parallel.
    #[arg(long)]
    workers: Option<usize>,
}

fn execute(args: Args) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", args.config.display())))?;
    let mut config = parse_config(&text)?;
    if let Some(dir) = args.config.parent() {
        config.resolve_paths(dir);
    }
    let opts = RunOptions {
        seed: args.seed,
        out: args.out,
        long: args.long,
        workers: args.workers,
    };
    Ok(run(&config, &opts)?.lines)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(args) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
