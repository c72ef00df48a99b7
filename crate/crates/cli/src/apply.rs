//! `apply`: one sweep of the operator over a source field. Reads a gauge
//! configuration, applies ψ' = Dψ, and reports the exact per-sweep work
//! (V × 1464 flops from the ledger) together with the achieved rate.

use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use serde_json::json;

use crate::common::{dims_label, Ctx, Failure, OutputFormat};
use crate::record::{emit, RunRecord};
use crate::source::{BoundaryArg, SourceArgs};
use wilson_cg::io::{self, fermion_payload, fnv1a64};
use wilson_cg::solver::norm_sq;
use wilson_cg::{apply_d, stencil_flops_per_site, NeighborTable};

#[derive(Args, Debug)]
pub struct ApplyArgs {
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
    /// Write the result field here.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

pub fn run(ctx: &Ctx, args: &ApplyArgs) -> Result<(), Failure> {
    let kappa = crate::common::resolve_kappa(args.kappa, args.mq)?;

    let read_started = Instant::now();
    let gauge = io::read_gauge(&args.gauge)?;
    let read_s = read_started.elapsed().as_secs_f64();
    let dims = gauge.dims();

    let setup_started = Instant::now();
    let table = NeighborTable::build(dims, args.boundary.condition());
    let psi = args.source.build(dims)?;
    let setup_s = setup_started.elapsed().as_secs_f64();

    let run_started = Instant::now();
    let image = apply_d(&gauge, &psi, &table, kappa, ctx.mode());
    let run_s = run_started.elapsed().as_secs_f64();

    let flops_total = dims.volume() as u64 * stencil_flops_per_site().total();
    let image_norm = norm_sq(&image, ctx.mode()).sqrt();
    let checksum = fnv1a64(&fermion_payload(&image));

    let mut write_s = None;
    if let Some(out) = &args.out {
        let write_started = Instant::now();
        io::write_fermion(out, &image)?;
        write_s = Some(write_started.elapsed().as_secs_f64());
    }

    let mut record = RunRecord::new("apply", dims);
    record.param("gauge", json!(args.gauge.display().to_string()));
    record.param("kappa", json!(kappa));
    record.param("boundary", json!(args.boundary.name()));
    record.param("mode", json!(ctx.mode_name()));
    args.source.describe(&mut record);
    record.flops_total = flops_total;
    record.result("image_norm", json!(image_norm));
    record.result("image_checksum", json!(format!("{checksum:#018x}")));
    if let Some(out) = &args.out {
        record.result("out", json!(out.display().to_string()));
    }
    record.timing.read_s = Some(read_s);
    record.timing.setup_s = Some(setup_s);
    record.timing.run_s = run_s;
    record.timing.write_s = write_s;
    record.timing.sites_per_s = Some(dims.volume() as f64 / run_s);
    emit(&mut record, ctx, true)?;

    match ctx.format {
        OutputFormat::Human => {
            println!(
                "apply: {} lattice, {} sites, kappa = {kappa}, {} time boundary",
                dims_label(dims),
                dims.volume(),
                args.boundary.name()
            );
            println!("  source            {}", args.source.label());
            println!("  flops             {flops_total} (V x {})", stencil_flops_per_site().total());
            println!("  image 2-norm      {image_norm:.12e}");
            println!("  image checksum    {checksum:#018x}");
            println!("  sweep wall time   {run_s:.6} s");
            println!("  achieved          {:.3} GFLOPs", flops_total as f64 / run_s / 1e9);
            if let Some(out) = &args.out {
                println!("  result written to {}", out.display());
            }
        }
        OutputFormat::Csv => {
            println!("key,value");
            println!("volume,{}", dims.volume());
            println!("kappa,{kappa}");
            println!("flops,{flops_total}");
            println!("image_norm,{image_norm:.17e}");
            println!("image_checksum,{checksum:#018x}");
        }
        OutputFormat::JsonLines => {}
    }
    Ok(())
}
