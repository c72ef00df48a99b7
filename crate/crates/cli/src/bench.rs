//! `bench`: steady-state timing of repeated operator sweeps with the
//! fields resident in memory (read once, swept many times). The flop
//! figure is never estimated: it is reps × V × the per-site ledger, and
//! the command reports the rate both from the accumulated ledger and from
//! that closed formula so the two can be checked against each other.

use std::time::Instant;

use clap::Args;
use serde_json::json;

use crate::common::{dims_label, Ctx, Failure, OutputFormat};
use crate::record::{emit, RunRecord};
use crate::source::BoundaryArg;
use wilson_cg::{
    apply_d, stencil_flops_per_site, FermionField, FlopLedger, GaugeField, LatticeDims,
    NeighborTable,
};

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Spatial extent (even, at least 2).
    #[arg(long = "L", value_name = "L")]
    pub l: usize,
    /// Temporal extent (even, at least 2).
    #[arg(long = "T", value_name = "T")]
    pub t: usize,
    /// Hopping parameter κ.
    #[arg(long, default_value_t = 0.1)]
    pub kappa: f64,
    /// Timed sweeps (one untimed warmup sweep runs first).
    #[arg(long, default_value_t = 10)]
    pub reps: u64,
    /// Seed for the random gauge background.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Time-direction boundary condition.
    #[arg(long, value_enum, default_value_t = BoundaryArg::Antiperiodic)]
    pub boundary: BoundaryArg,
}

pub fn run(ctx: &Ctx, args: &BenchArgs) -> Result<(), Failure> {
    if args.reps == 0 {
        return Err(Failure::Validation("--reps must be at least 1".into()));
    }
    let dims = LatticeDims::new(args.l, args.t)?;
    let v = dims.volume() as u64;

    let setup_started = Instant::now();
    let gauge = GaugeField::random(dims, args.seed);
    let table = NeighborTable::build(dims, args.boundary.condition());
    let psi = FermionField::random(dims, args.seed.wrapping_add(1));
    let setup_s = setup_started.elapsed().as_secs_f64();

    // Warmup sweep: pays the one-time costs (page faults, lazily built
    // projection tables) outside the timed region.
    let mut image = apply_d(&gauge, &psi, &table, args.kappa, ctx.mode());

    let mut ledger = FlopLedger::new();
    let mut rep_s = Vec::with_capacity(args.reps as usize);
    let run_started = Instant::now();
    for _ in 0..args.reps {
        let rep_started = Instant::now();
        image = apply_d(&gauge, &image, &table, args.kappa, ctx.mode());
        rep_s.push(rep_started.elapsed().as_secs_f64());
        ledger.tally_stencil_sites(v);
    }
    let run_s = run_started.elapsed().as_secs_f64();

    // Two routes to the same count: the ledger accumulated per sweep, and
    // the closed formula reps x V x flops/site.
    let flops_ledger = ledger.total();
    let flops_formula = args.reps * v * stencil_flops_per_site().total();
    let gflops_ledger = flops_ledger as f64 / run_s / 1e9;
    let gflops_formula = flops_formula as f64 / run_s / 1e9;
    let sites_per_s = (args.reps * v) as f64 / run_s;

    let mut record = RunRecord::new("bench", dims);
    record.param("kappa", json!(args.kappa));
    record.param("reps", json!(args.reps));
    record.param("boundary", json!(args.boundary.name()));
    record.param("mode", json!(ctx.mode_name()));
    record.seed = Some(args.seed);
    record.flops_total = flops_ledger;
    record.result("flops_formula", json!(flops_formula));
    record.result("flops_per_site", json!(stencil_flops_per_site().total()));
    record.timing.setup_s = Some(setup_s);
    record.timing.run_s = run_s;
    record.timing.rep_s = Some(rep_s.clone());
    record.timing.sites_per_s = Some(sites_per_s);
    emit(&mut record, ctx, true)?;

    match ctx.format {
        OutputFormat::Human => {
            println!(
                "bench: {} lattice, {} sites, kappa = {}, random gauge (seed {}), {} reps (+1 warmup)",
                dims_label(dims),
                v,
                args.kappa,
                args.seed,
                args.reps
            );
            let mut sorted = rep_s.clone();
            sorted.sort_by(f64::total_cmp);
            let median = sorted[sorted.len() / 2];
            println!(
                "  sweep time min/median/max  {:.3} / {:.3} / {:.3} ms",
                sorted[0] * 1e3,
                median * 1e3,
                sorted[sorted.len() - 1] * 1e3
            );
            println!("  sites/s                    {sites_per_s:.4e}");
            println!(
                "  flops                      {flops_ledger} (ledger) = {flops_formula} (reps x V x {})",
                stencil_flops_per_site().total()
            );
            println!("  GFLOPs (ledger)            {gflops_ledger:.4}");
            println!("  GFLOPs (formula)           {gflops_formula:.4}");
        }
        OutputFormat::Csv => {
            println!("rep,seconds,gflops");
            for (k, s) in rep_s.iter().enumerate() {
                let per_sweep = v * stencil_flops_per_site().total();
                println!("{k},{s:.9e},{:.6}", per_sweep as f64 / s / 1e9);
            }
        }
        OutputFormat::JsonLines => {}
    }
    Ok(())
}
