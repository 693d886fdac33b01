//! `scatterlab`: synthesis, scattering features and experiment drivers.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod exit;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::experiment::ExperimentCmd;
use commands::scatter::ScatterArgs;
use commands::synth::SynthCmd;
use config::RunConfig;
use exit::{CliError, CliResult};
use run::Run;

#[derive(Debug, Parser)]
#[command(name = "scatterlab", version, about = "Wavelet scattering with squared-modulus activation")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// TOML config file; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed; falls back to the config file, then SCATTERLAB_SEED, then 0.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write synthetic test signals.
    #[command(subcommand)]
    Synth(SynthCmd),
    /// Compute scattering features of a signal file.
    Scatter(ScatterArgs),
    /// Run an experiment driver.
    #[command(subcommand)]
    Experiment(ExperimentCmd),
}

impl Command {
    fn name(&self) -> String {
        match self {
            Command::Synth(c) => format!("synth {}", c.name()),
            Command::Scatter(_) => "scatter".into(),
            Command::Experiment(c) => format!("experiment {}", c.name()),
        }
    }
}

fn start(global: &GlobalArgs, subcommand: String) -> CliResult<Run> {
    let mut cfg = match &global.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let env = std::env::var(config::SEED_ENV).ok();
    let seed = config::resolve_seed(global.seed, cfg.seed, env.as_deref())?;
    let jobs = global.jobs.or(cfg.jobs);
    if jobs == Some(0) {
        return Err(CliError::usage("--jobs must be at least 1"));
    }
    if let Some(n) = jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Internal(e.into()))?;
    }
    cfg.seed = Some(seed);
    cfg.jobs = jobs;
    Ok(Run::new(subcommand, cfg))
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let run = start(&cli.global, cli.command.name())?;
    match cli.command {
        Command::Synth(c) => commands::synth::execute(c, run),
        Command::Scatter(a) => commands::scatter::execute(a, run),
        Command::Experiment(c) => commands::experiment::execute(c, run),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            return ExitCode::from(code as u8);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
