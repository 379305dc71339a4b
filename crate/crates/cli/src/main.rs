//! Experiment runner for wiggled-waveguide spectra.

mod config;
mod run;
mod svg;

use clap::{Args, Parser, Subcommand};
use run::{CliError, RunContext};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "wiggleguide",
    about = "Eigenvalues, perturbation series, tail estimates, and resolvent decay for randomly wiggled waveguide segments",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV/JSON artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also emit self-contained SVG plots.
    #[arg(long)]
    svg: bool,
    /// Override the config worker count.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Lowest eigenpairs of one configuration (with optional refinement).
    Eig(RunArgs),
    /// Fourier coefficients and the second-order shift coefficient.
    Series(RunArgs),
    /// Deterministic lower-bound report for one configuration.
    Bound(RunArgs),
    /// Monte Carlo estimate of P(lambda1 - 1 <= t).
    Mc(RunArgs),
    /// Neumann bracketing check across sub-segments.
    Brackets(RunArgs),
    /// Block-resolvent decay sweep over strip pairs.
    Ct(RunArgs),
    /// Weak-disorder coupling window and initial scale.
    Interval(RunArgs),
}

fn execute(cmd: &Cmd) -> Result<(), CliError> {
    let args = match cmd {
        Cmd::Eig(a)
        | Cmd::Series(a)
        | Cmd::Bound(a)
        | Cmd::Mc(a)
        | Cmd::Brackets(a)
        | Cmd::Ct(a)
        | Cmd::Interval(a) => a,
    };
    let loaded = config::load_config(&args.config).map_err(|e| CliError::Config(e.0))?;
    let ctx = RunContext {
        loaded,
        out_dir: args.out.clone(),
        svg: args.svg,
        workers_override: args.workers,
    };
    match cmd {
        Cmd::Eig(_) => run::run_eig(&ctx),
        Cmd::Series(_) => run::run_series(&ctx),
        Cmd::Bound(_) => run::run_bound(&ctx),
        Cmd::Mc(_) => run::run_mc(&ctx),
        Cmd::Brackets(_) => run::run_brackets(&ctx),
        Cmd::Ct(_) => run::run_ct(&ctx),
        Cmd::Interval(_) => run::run_interval(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let record = serde_json::json!({
                "error": { "kind": e.kind(), "message": e.to_string(), "exit": e.exit_code() }
            });
            eprintln!("{record}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
