//! `gen`: produce a gauge-configuration file. A unit ("cold") field for
//! free-field checks, or a random SU(3) field drawn from a seed. The same
//! seed yields the same file bytes on every platform, so the printed
//! checksum doubles as a cross-machine determinism check.

use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use serde_json::json;

use crate::common::{dims_label, Ctx, Failure, OutputFormat};
use crate::record::{emit, RunRecord};
use wilson_cg::io::{self, fnv1a64, gauge_payload, GenerateKind};
use wilson_cg::LatticeDims;

#[derive(Args, Debug)]
pub struct GenArgs {
    /// Spatial extent (even, at least 2).
    #[arg(long = "L", value_name = "L")]
    pub l: usize,
    /// Temporal extent (even, at least 2).
    #[arg(long = "T", value_name = "T")]
    pub t: usize,
    /// Field content: all links the identity, or random SU(3).
    #[arg(long, value_enum, default_value_t = FieldKindArg::Random)]
    pub kind: FieldKindArg,
    /// Seed for random link generation.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output file.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum FieldKindArg {
    Unit,
    Random,
}

pub fn run(ctx: &Ctx, args: &GenArgs) -> Result<(), Failure> {
    let dims = LatticeDims::new(args.l, args.t)?;
    let started = Instant::now();
    let (kind, kind_name, seed) = match args.kind {
        FieldKindArg::Unit => (GenerateKind::Unit, "unit", None),
        FieldKindArg::Random => (GenerateKind::Random { seed: args.seed }, "random", Some(args.seed)),
    };
    let field = io::generate(kind, dims);
    let setup_s = started.elapsed().as_secs_f64();

    let write_started = Instant::now();
    io::write_gauge(&args.out, &field)?;
    let write_s = write_started.elapsed().as_secs_f64();

    let checksum = fnv1a64(&gauge_payload(&field));
    let file_len = std::fs::metadata(&args.out)
        .map_err(|e| Failure::Io(format!("could not stat {}: {e}", args.out.display())))?
        .len();

    let mut record = RunRecord::new("gen", dims);
    record.param("kind", json!(kind_name));
    record.param("out", json!(args.out.display().to_string()));
    record.seed = seed;
    record.result("checksum", json!(format!("{checksum:#018x}")));
    record.result("file_bytes", json!(file_len));
    record.timing.setup_s = Some(setup_s);
    record.timing.write_s = Some(write_s);
    record.timing.run_s = setup_s;
    emit(&mut record, ctx, true)?;

    match ctx.format {
        OutputFormat::Human => {
            let seed_note = seed.map(|s| format!(" (seed {s})")).unwrap_or_default();
            println!("gen: wrote {kind_name} gauge field{seed_note} on {} to {}", dims_label(dims), args.out.display());
            println!("  payload checksum {checksum:#018x}");
            println!("  file size {file_len} bytes");
        }
        OutputFormat::Csv => {
            println!("key,value");
            println!("kind,{kind_name}");
            if let Some(s) = seed {
                println!("seed,{s}");
            }
            println!("checksum,{checksum:#018x}");
            println!("file_bytes,{file_len}");
        }
        OutputFormat::JsonLines => {}
    }
    Ok(())
}
