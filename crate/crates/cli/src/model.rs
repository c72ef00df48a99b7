//! `model`: the analytic pipeline performance report. For each device
//! profile it evaluates the sustained-throughput law V·f·ν/(V·δ+τ), the
//! pipeline bound f·ν/δ, the transfer-inclusive effective rate where a
//! channel bandwidth is calibrated, and the resident memory footprint —
//! then compares against the device's published figure on the basis the
//! profile declares (a measured finite-volume run, or an asymptotic
//! capability claim). Whenever the published figure is better explained
//! by a different per-site operation count than the ledger's, the
//! implied count is printed next to the ledger value rather than being
//! silently adopted.

use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use serde_json::{json, Value};

use crate::common::{dims_label, human_bytes, parse_clock, Ctx, Failure, OutputFormat};
use crate::record::{emit, RunRecord};
use wilson_cg::perf::{
    asymptotic_gflops, compare_reported, default_flops_per_site, memory_footprint,
    resource_scaling_check, throughput, with_transfer, ComparisonKind, DeviceProfile,
    MemoryLayout, ProfileSet,
};
use wilson_cg::LatticeDims;

/// Pass/fail threshold for comparisons against published figures.
const REL_TOL: f64 = 0.01;

#[derive(Args, Debug)]
pub struct ModelArgs {
    /// Device profile name; every known device when omitted.
    #[arg(long)]
    pub profile: Option<String>,
    /// TOML profile file; the built-in set when omitted.
    #[arg(long, value_name = "PATH")]
    pub profiles_file: Option<PathBuf>,
    /// Spatial extent override (defaults to the profile reference volume).
    #[arg(long = "L", value_name = "L")]
    pub l: Option<usize>,
    /// Temporal extent override.
    #[arg(long = "T", value_name = "T")]
    pub t: Option<usize>,
    /// Initiation-interval override (cycles).
    #[arg(long, value_name = "CYCLES")]
    pub ii: Option<u64>,
    /// Clock override, e.g. 150MHz or 1.5GHz; applies to every selected device.
    #[arg(long, value_name = "RATE")]
    pub clock: Option<String>,
    /// Sweeps per transfer in the effective-throughput model.
    #[arg(long, default_value_t = 1)]
    pub calls: u64,
    /// Keep fields resident across calls (one transfer total).
    #[arg(long)]
    pub resident: bool,
    /// Gauge-array copies in the footprint model.
    #[arg(long, default_value_t = 2)]
    pub duplication: u64,
    /// Block-boundary copies in the footprint model.
    #[arg(long, default_value_t = 2)]
    pub halo_copies: u64,
    /// Model real/imaginary parts as separate streams.
    #[arg(long)]
    pub channel_split: bool,
}

pub fn run(ctx: &Ctx, args: &ModelArgs) -> Result<(), Failure> {
    let started = Instant::now();
    if args.calls == 0 {
        return Err(Failure::Validation("--calls must be at least 1".into()));
    }
    if args.duplication == 0 {
        return Err(Failure::Validation("--duplication must be at least 1".into()));
    }
    if args.ii == Some(0) {
        return Err(Failure::Validation("--ii must be at least 1".into()));
    }

    let set = match &args.profiles_file {
        Some(path) => ProfileSet::from_path(path)?,
        None => ProfileSet::builtin(),
    };
    let reference = set.reference_dims();
    let dims = LatticeDims::new(args.l.unwrap_or(reference.l()), args.t.unwrap_or(reference.t()))?;
    let clock_override = args.clock.as_deref().map(parse_clock).transpose()?;

    let mut selected: Vec<DeviceProfile> = match &args.profile {
        Some(name) => vec![set.get(name)?.clone()],
        None => set.devices.clone(),
    };
    for device in &mut selected {
        if let Some(clock) = clock_override {
            device.clock_hz = clock;
        }
        if let Some(ii) = args.ii {
            if let Some(row) = device.timing.first_mut() {
                row.interval = ii;
            }
        }
    }

    let layout = MemoryLayout {
        duplication: args.duplication,
        halo_copies: args.halo_copies,
        channel_split: args.channel_split,
    };
    let f = default_flops_per_site();

    if ctx.format == OutputFormat::Csv {
        println!(
            "device,basis,clock_mhz,delta,tau,flops_per_site,model_gflops,\
             reported_gflops,rel_err,implied_f,model_at_implied_f,within_1pct"
        );
    }
    let mut entries = Vec::new();
    for device in &selected {
        entries.push(report_device(ctx, device, dims, f, &layout, args)?);
    }

    let scaling = resource_scaling_check(&set.scaling);
    if args.profile.is_none() && ctx.format == OutputFormat::Human {
        println!("resource scaling across problem sizes ({} fixture rows):", set.scaling.len());
        for claim in &scaling.claims {
            let verdict = if claim.pass { "PASS" } else { "FAIL" };
            println!("  {}: {verdict} ({})", claim.claim, claim.detail);
        }
        println!("  overall: {}", if scaling.pass() { "PASS" } else { "FAIL" });
    }

    let mut record = RunRecord::new("model", dims);
    if let Some(name) = &args.profile {
        record.param("profile", json!(name));
    }
    record.param("calls", json!(args.calls));
    record.param("resident", json!(args.resident));
    record.model = Some(json!({
        "flops_per_site": f,
        "devices": entries,
        "scaling": {
            "pass": scaling.pass(),
            "claims": scaling
                .claims
                .iter()
                .map(|c| json!({ "claim": c.claim, "pass": c.pass, "detail": c.detail }))
                .collect::<Vec<_>>(),
        },
    }));
    record.timing.run_s = started.elapsed().as_secs_f64();
    emit(&mut record, ctx, true)?;
    Ok(())
}

fn report_device(
    ctx: &Ctx,
    device: &DeviceProfile,
    dims: LatticeDims,
    f: u64,
    layout: &MemoryLayout,
    args: &ModelArgs,
) -> Result<Value, Failure> {
    let row = device.timing()?;
    let v = dims.volume() as u64;
    let sweep = throughput(v, f, device.clock_hz, row.interval, row.latency);
    let bound = asymptotic_gflops(f, device.clock_hz, row.interval);
    let comparison = compare_reported(device, v, f)?;
    let transfer = if device.channel_bandwidth > 0.0 {
        Some(with_transfer(&sweep, v, device, args.resident, args.calls)?)
    } else {
        None
    };
    let footprint = memory_footprint(dims, layout)?;
    let basis = match device.comparison {
        ComparisonKind::Measured => "measured",
        ComparisonKind::Asymptotic => "asymptotic",
    };

    if ctx.format == OutputFormat::Human {
        println!(
            "device {}: clock {:.1} MHz, delta = {} cycles, tau = {} cycles",
            device.name,
            device.clock_hz / 1e6,
            row.interval,
            row.latency
        );
        println!(
            "  sweep at {} (V = {v}): {} cycles, {:.4e} s, pipeline bound {bound:.4} GFLOPs",
            dims_label(dims),
            sweep.cycles_total,
            sweep.time_s
        );
        match &comparison {
            None => println!("  no published figure to compare against"),
            Some(cmp) => {
                let (label, formula) = match device.comparison {
                    ComparisonKind::Measured => {
                        ("measured sweep", format!("V*f*nu/(V*delta+tau) at V = {v}"))
                    }
                    ComparisonKind::Asymptotic => {
                        ("pipeline capability", "f*nu/delta".to_string())
                    }
                };
                println!("  comparison basis: {label} ({formula})");
                let verdict = if cmp.within(REL_TOL) { "PASS" } else { "FAIL" };
                println!(
                    "  model {:.4} GFLOPs at ledger f = {} vs reported {:.4} -> {verdict} within 1% (rel. err. {:.2}%)",
                    cmp.model_gflops,
                    cmp.ledger_f,
                    cmp.reported_gflops,
                    cmp.rel_error * 100.0
                );
                if cmp.implied_f_noteworthy() {
                    println!(
                        "  note: the reported figure implies f ~= {:.1} flops/site, {:.2}% away from the {} ledger count;",
                        cmp.implied_f,
                        cmp.implied_f_deviation * 100.0,
                        cmp.ledger_f
                    );
                    let at_implied =
                        if (cmp.model_at_implied_f - cmp.reported_gflops).abs() / cmp.reported_gflops <= REL_TOL {
                            "PASS"
                        } else {
                            "FAIL"
                        };
                    println!(
                        "        model at implied f = {:.0}: {:.4} GFLOPs -> {at_implied} within 1%",
                        cmp.implied_f.round(),
                        cmp.model_at_implied_f
                    );
                }
            }
        }
        match &transfer {
            Some(with) => {
                let calls_note = if args.resident {
                    format!("calls = {}, fields resident, one transfer total", args.calls)
                } else {
                    format!("calls = {}, one transfer per call", args.calls)
                };
                println!(
                    "  transfer: V x 2880 bytes over {} channels at {:.2} GB/s each ({calls_note})",
                    device.ddr_channels,
                    device.channel_bandwidth / 1e9
                );
                let reported = device
                    .reported_effective_gflops
                    .map(|g| format!(" (reported {g})"))
                    .unwrap_or_default();
                println!(
                    "    effective {:.4} GFLOPs{reported}",
                    with.effective_gflops.expect("transfer model fills the effective rate")
                );
            }
            None => println!("  transfer: no calibrated channel bandwidth for this device"),
        }
        println!(
            "  resident footprint: gauge {} + spinors {} + halo {} = {}{}",
            human_bytes(footprint.gauge_bytes),
            human_bytes(footprint.spinor_bytes),
            human_bytes(footprint.halo_bytes),
            human_bytes(footprint.total_bytes),
            footprint
                .per_channel_bytes
                .map(|b| format!(" ({} per re/im stream)", human_bytes(b)))
                .unwrap_or_default()
        );
        println!();
    } else if ctx.format == OutputFormat::Csv {
        let (model, reported, rel, implied, at_implied, within) = match &comparison {
            Some(cmp) => (
                format!("{:.6}", cmp.model_gflops),
                format!("{:.6}", cmp.reported_gflops),
                format!("{:.6}", cmp.rel_error),
                format!("{:.2}", cmp.implied_f),
                format!("{:.6}", cmp.model_at_implied_f),
                format!("{}", cmp.within(REL_TOL)),
            ),
            None => Default::default(),
        };
        println!(
            "{},{},{:.3},{},{},{},{},{},{},{},{},{}",
            device.name,
            basis,
            device.clock_hz / 1e6,
            row.interval,
            row.latency,
            f,
            model,
            reported,
            rel,
            implied,
            at_implied,
            within
        );
    }

    Ok(json!({
        "device": device.name,
        "basis": basis,
        "clock_hz": device.clock_hz,
        "delta": row.interval,
        "tau": row.latency,
        "sweep": {
            "cycles": sweep.cycles_total,
            "time_s": sweep.time_s,
            "gflops": sweep.gflops,
        },
        "pipeline_bound_gflops": bound,
        "comparison": comparison.as_ref().map(|cmp| json!({
            "model_gflops": cmp.model_gflops,
            "reported_gflops": cmp.reported_gflops,
            "rel_error": cmp.rel_error,
            "implied_f": cmp.implied_f,
            "ledger_f": cmp.ledger_f,
            "implied_f_deviation": cmp.implied_f_deviation,
            "model_at_implied_f": cmp.model_at_implied_f,
            "within_1pct": cmp.within(REL_TOL),
            "implied_f_noteworthy": cmp.implied_f_noteworthy(),
        })),
        "transfer": transfer.map(|with| json!({
            "transfer_s": with.transfer_s,
            "effective_gflops": with.effective_gflops,
            "calls": args.calls,
            "resident": args.resident,
        })),
        "footprint": {
            "gauge_bytes": footprint.gauge_bytes,
            "spinor_bytes": footprint.spinor_bytes,
            "halo_bytes": footprint.halo_bytes,
            "total_bytes": footprint.total_bytes,
            "per_channel_bytes": footprint.per_channel_bytes,
        },
    }))
}
