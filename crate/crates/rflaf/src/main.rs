use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rflaf::config::{ExperimentConfig, Mode};
use rflaf::experiments;

#[derive(Parser)]
#[command(name = "rflaf", version, about = "Random features with learnable activation functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare the closed-form kernel against Monte-Carlo estimates.
    KernelVerify(RunArgs),
    /// Check the Taylor coefficients and truncated series of the kernel.
    TaylorVerify(RunArgs),
    /// Measure how the random-feature error decays with the number of features.
    RateStudy(RunArgs),
    /// Train the learnable-activation model against fixed-activation baselines.
    TrainCompare(RunArgs),
    /// Tabulate a learned or quadrature activation on a grid.
    ExportActivation(RunArgs),
    /// Evaluate the norm bounds and the quadrature construction.
    Bounds(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment file. Its `mode` must match the subcommand.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory. Defaults to `out` from the config, then `runs/<mode>`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the master seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl Command {
    fn split(self) -> (Mode, RunArgs) {
        match self {
            Command::KernelVerify(a) => (Mode::KernelVerify, a),
            Command::TaylorVerify(a) => (Mode::TaylorVerify, a),
            Command::RateStudy(a) => (Mode::RateStudy, a),
            Command::TrainCompare(a) => (Mode::TrainCompare, a),
            Command::ExportActivation(a) => (Mode::ExportActivation, a),
            Command::Bounds(a) => (Mode::Bounds, a),
        }
    }
}

fn load(mode: Mode, args: &RunArgs) -> rflaf::Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::new(mode),
    };
    if cfg.mode != mode {
        return Err(rflaf::Error::Config(format!(
            "mode: file declares `{}` but the subcommand is `{mode}`",
            cfg.mode
        )));
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let (mode, args) = Cli::parse().command.split();
    let cfg = match load(mode, &args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let out = args
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("runs").join(mode.name()));
    match experiments::run(&cfg, &out) {
        Ok(report) => {
            print!("{}", report.table());
            println!("wrote {} files to {}", report.files.len(), out.display());
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
