//! Command-line driver for the Wilson-Dirac operator library: generate
//! gauge configurations, apply the operator, run the conjugate-gradient
//! solver, time repeated sweeps, and evaluate the analytic pipeline
//! performance model.
//!
//! Exit codes: 0 success, 2 invalid flags or input data, 3 filesystem
//! I/O failure, 4 solver non-convergence. `WILSON_CG_THREADS` caps the
//! worker pool; `--deterministic` forces sequential fixed-order
//! reductions so repeated runs agree bit for bit.

mod apply;
mod bench;
mod common;
mod gen;
mod model;
mod record;
mod solve;
mod source;

use clap::{Parser, Subcommand};

use common::{Ctx, Failure, OutputFormat};

#[derive(Parser, Debug)]
#[command(
    name = "wilson-cg",
    version,
    about = "Wilson-Dirac operator, CG solver, and pipeline performance model"
)]
struct Cli {
    /// Output format for results.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Human)]
    format: OutputFormat,
    /// Force sequential fixed-order reductions (bit-reproducible runs).
    #[arg(long, global = true)]
    deterministic: bool,
    /// Write a JSON run record to this path.
    #[arg(long, global = true, value_name = "PATH")]
    report: Option<std::path::PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a gauge configuration file.
    Gen(gen::GenArgs),
    /// Apply the operator to a source field once.
    Apply(apply::ApplyArgs),
    /// Solve D psi = eta by CG on the normal equations.
    Solve(solve::SolveArgs),
    /// Time repeated operator sweeps over resident fields.
    Bench(bench::BenchArgs),
    /// Evaluate the analytic performance model for device profiles.
    Model(model::ModelArgs),
}

fn init_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("WILSON_CG_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().map_err(|_| {
        Failure::Validation(format!("WILSON_CG_THREADS must be a positive integer, got {raw:?}"))
    })?;
    if threads == 0 {
        return Err(Failure::Validation("WILSON_CG_THREADS must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Validation(format!("could not size the thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), Failure> {
    init_threads()?;
    let ctx = Ctx { format: cli.format, deterministic: cli.deterministic, report: cli.report };
    match &cli.command {
        Command::Gen(args) => gen::run(&ctx, args),
        Command::Apply(args) => apply::run(&ctx, args),
        Command::Solve(args) => solve::run(&ctx, args),
        Command::Bench(args) => bench::run(&ctx, args),
        Command::Model(args) => model::run(&ctx, args),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(failure) = run(cli) {
        eprintln!("error: {}", failure.message());
        std::process::exit(failure.code());
    }
}
