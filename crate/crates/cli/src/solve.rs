//! `solve`: conjugate gradient on the normal equations. Reads a gauge
//! configuration, builds the right-hand side, runs CG on DD†y = η, and
//! reports iterations, the recomputed true residual, the exact flop
//! count, and the achieved rate. A run that stops at the iteration cap
//! still writes its record and best iterate, then exits with code 4.

use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use serde_json::json;

use crate::common::{dims_label, Ctx, Failure, OutputFormat};
use crate::record::{emit, RunRecord, SolverRecord};
use crate::source::{BoundaryArg, SourceArgs};
use wilson_cg::io::{self, fermion_payload, fnv1a64};
use wilson_cg::solver::{cg_normal, SolverParams};
use wilson_cg::NeighborTable;

#[derive(Args, Debug)]
pub struct SolveArgs {
    /// Gauge configuration file.
    #[arg(long, value_name = "PATH")]
    pub gauge: PathBuf,
    /// Hopping parameter κ.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Quark mass m_q; sets κ = 1/(2(m_q + 4)).
    #[arg(long)]
    pub mq: Option<f64>,
    #[command(flatten)]
    pub source: SourceArgs,
    /// Time-direction boundary condition.
    #[arg(long, value_enum, default_value_t = BoundaryArg::Antiperiodic)]
    pub boundary: BoundaryArg,
    /// Relative residual target for |D psi - eta| / |eta|.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Iteration cap.
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    /// Write the solution field here.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

pub fn run(ctx: &Ctx, args: &SolveArgs) -> Result<(), Failure> {
    let kappa = crate::common::resolve_kappa(args.kappa, args.mq)?;

    let read_started = Instant::now();
    let gauge = io::read_gauge(&args.gauge)?;
    let read_s = read_started.elapsed().as_secs_f64();
    let dims = gauge.dims();

    let setup_started = Instant::now();
    let table = NeighborTable::build(dims, args.boundary.condition());
    let eta = args.source.build(dims)?;
    let setup_s = setup_started.elapsed().as_secs_f64();

    let params = SolverParams { tol: args.tol, max_iter: args.max_iter, initial_guess: None };
    let run_started = Instant::now();
    let solution = cg_normal(&gauge, &eta, kappa, &params, &table, ctx.mode())?;
    let run_s = run_started.elapsed().as_secs_f64();

    let psi_checksum = fnv1a64(&fermion_payload(&solution.psi));
    let mut write_s = None;
    if let Some(out) = &args.out {
        let write_started = Instant::now();
        io::write_fermion(out, &solution.psi)?;
        write_s = Some(write_started.elapsed().as_secs_f64());
    }

    let mut record = RunRecord::new("solve", dims);
    record.param("gauge", json!(args.gauge.display().to_string()));
    record.param("kappa", json!(kappa));
    record.param("boundary", json!(args.boundary.name()));
    record.param("mode", json!(ctx.mode_name()));
    record.param("tol", json!(args.tol));
    record.param("max_iter", json!(args.max_iter));
    args.source.describe(&mut record);
    record.flops_total = solution.flops_total;
    record.solver = Some(SolverRecord {
        iterations: solution.iterations,
        converged: solution.converged,
        normal_residual: solution.normal_residual,
        true_residual: solution.true_residual,
        residual_history_len: solution.residual_history.len(),
        psi_checksum: format!("{psi_checksum:#018x}"),
    });
    if let Some(out) = &args.out {
        record.result("out", json!(out.display().to_string()));
    }
    record.timing.read_s = Some(read_s);
    record.timing.setup_s = Some(setup_s);
    record.timing.run_s = run_s;
    record.timing.write_s = write_s;
    emit(&mut record, ctx, true)?;

    match ctx.format {
        OutputFormat::Human => {
            println!(
                "solve: {} lattice, {} sites, kappa = {kappa}, {} time boundary, tol = {:e}",
                dims_label(dims),
                dims.volume(),
                args.boundary.name(),
                args.tol
            );
            println!("  source            {}", args.source.label());
            let verdict = if solution.converged { "converged" } else { "NOT converged" };
            println!("  {verdict} after {} iterations", solution.iterations);
            println!("  normal residual   {:.6e}", solution.normal_residual);
            println!("  true residual     {:.6e}", solution.true_residual);
            println!("  flops             {}", solution.flops_total);
            println!("  solve wall time   {run_s:.6} s");
            println!("  achieved          {:.3} GFLOPs", solution.flops_total as f64 / run_s / 1e9);
            println!("  solution checksum {psi_checksum:#018x}");
            if let Some(out) = &args.out {
                println!("  solution written to {}", out.display());
            }
        }
        OutputFormat::Csv => {
            println!("iteration,normal_residual");
            for (k, r) in solution.residual_history.iter().enumerate() {
                println!("{k},{r:.17e}");
            }
        }
        OutputFormat::JsonLines => {}
    }

    if !solution.converged {
        return Err(Failure::NonConvergence(format!(
            "solver stopped after {} iterations at true residual {:.3e} (target {:e})",
            solution.iterations, solution.true_residual, args.tol
        )));
    }
    Ok(())
}
