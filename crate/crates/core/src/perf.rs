//! Analytic throughput, transfer, and memory model for a pipelined
//! stencil engine.
//!
//! The model targets dataflow hardware (FPGA-style) where one stencil
//! kernel is a fixed four-stage pipeline:
//!
//! 1. register load — 1 cycle,
//! 2. spin projections (vector add/sub layer) — one double-op latency,
//! 3. color matrix-vector products plus the κ rescale — a five-layer
//!    cascade of double ops,
//! 4. accumulation of the nine contributions — four addition layers plus
//!    one copy cycle.
//!
//! With a double add/multiply latency of `l` cycles the stages cost
//! `(1, l, 5l, 4l+1)`; at the reference latency of 14 that is
//! `(1, 14, 70, 57)`, total 142. A pipelined kernel accepts a new site
//! every `δ` cycles (the initiation interval) and drains after `τ` cycles
//! (the total latency), so a sweep over `V` sites at clock `ν` needs
//! `V·δ + τ` cycles and sustains
//!
//! ```text
//! performance = V · f · ν / (V · δ + τ)
//! ```
//!
//! where `f` is the per-site operation count from the stencil ledger. As
//! `V → ∞` this approaches the pipeline bound `f·ν/δ`.
//!
//! Device profiles (clock, resource capacities, timing rows, memory
//! channels, published reference throughputs) ship as a TOML file embedded
//! in the crate and can be replaced at run time. Where a published
//! throughput disagrees with the ledger's `f`, comparisons surface the
//! implied per-site count `reported·δ/ν` instead of silently absorbing
//! the difference.

use crate::dirac;
use crate::lattice::{split_blocks, GeometryError, LatticeDims};
use serde::Deserialize;
use std::fmt;
use thiserror::Error;

/// Double-precision add/multiply latency, in cycles, used by the default
/// pipeline composition.
pub const DOUBLE_OP_LATENCY: u64 = 14;

/// Default per-site operation count: the instrumented stencil ledger.
pub fn default_flops_per_site() -> u64 {
    dirac::stencil_flops_per_site().total()
}

#[derive(Debug, Error)]
pub enum PerfError {
    #[error("initiation interval must be at least 1")]
    BadInitiationInterval,
    #[error("unknown device '{name}'; known devices: {known:?}")]
    UnknownDevice { name: String, known: Vec<String> },
    #[error("device '{name}' has no calibrated channel bandwidth")]
    MissingBandwidth { name: String },
    #[error("device '{name}' carries no timing row")]
    MissingTiming { name: String },
    #[error("profile file is not valid TOML: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("could not read profile file: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Latency decomposition of the four-stage stencil pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KernelTiming {
    stage_latencies: [u64; 4],
    initiation_interval: u64,
}

impl KernelTiming {
    pub fn new(stage_latencies: [u64; 4], initiation_interval: u64) -> Result<Self, PerfError> {
        if initiation_interval < 1 {
            return Err(PerfError::BadInitiationInterval);
        }
        Ok(KernelTiming { stage_latencies, initiation_interval })
    }

    /// The reference fully pipelined kernel: stages (1, 14, 70, 57),
    /// one new site per cycle.
    pub fn default_pipeline() -> Self {
        KernelTiming { stage_latencies: [1, 14, 70, 57], initiation_interval: 1 }
    }

    /// Recompose the stage latencies from a double add/multiply latency
    /// `l`: register load 1, projection layer `l`, five-layer cascade
    /// `5l`, four addition layers plus a copy `4l + 1`.
    pub fn from_double_latency(l: u64, initiation_interval: u64) -> Result<Self, PerfError> {
        KernelTiming::new([1, l, 5 * l, 4 * l + 1], initiation_interval)
    }

    pub fn stage_latencies(&self) -> [u64; 4] {
        self.stage_latencies
    }

    pub fn initiation_interval(&self) -> u64 {
        self.initiation_interval
    }

    /// Total pipeline latency: the sum of the stage latencies.
    pub fn total_latency(&self) -> u64 {
        kernel_latency(self.stage_latencies)
    }
}

/// Total kernel latency for a set of stage latencies (plain sum).
pub fn kernel_latency(stage_latencies: [u64; 4]) -> u64 {
    stage_latencies.iter().sum()
}

/// How a device's published throughput was obtained, which decides what
/// the model compares against it.
#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ComparisonKind {
    /// A measured finite-volume run: compare `V·f·ν/(V·δ+τ)` at the
    /// reference volume.
    Measured,
    /// A pipeline capability claim: compare the asymptote `f·ν/δ`.
    Asymptotic,
}

/// One latency/interval compilation point for a device.
#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
pub struct TimingRow {
    /// Kernel latency τ in cycles.
    pub latency: u64,
    /// Initiation interval δ in cycles.
    pub interval: u64,
}

/// A hardware target: clock, resource capacities, memory channels, and
/// the timing rows observed for it.
#[derive(Clone, Debug, Deserialize)]
pub struct DeviceProfile {
    pub name: String,
    /// Kernel clock ν in Hz.
    pub clock_hz: f64,
    pub bram: u64,
    pub dsp: u64,
    pub ff: u64,
    pub lut: u64,
    pub uram: u64,
    pub ddr_channels: u32,
    /// Bytes per second per memory channel; 0 means uncalibrated.
    #[serde(default)]
    pub channel_bandwidth: f64,
    /// Compilation points, best (operative) row first.
    pub timing: Vec<TimingRow>,
    /// Published compute-only throughput to compare against, GFLOPs.
    #[serde(default)]
    pub reported_gflops: Option<f64>,
    /// Published throughput including memory transfers, GFLOPs.
    #[serde(default)]
    pub reported_effective_gflops: Option<f64>,
    #[serde(default = "default_comparison")]
    pub comparison: ComparisonKind,
}

fn default_comparison() -> ComparisonKind {
    ComparisonKind::Measured
}

impl DeviceProfile {
    /// The operative timing row (first listed).
    pub fn timing(&self) -> Result<TimingRow, PerfError> {
        self.timing.first().copied().ok_or(PerfError::MissingTiming { name: self.name.clone() })
    }
}

/// Throughput estimate for one sweep configuration.
#[derive(Clone, Copy, Debug)]
pub struct PerfEstimate {
    /// Compute-only sustained throughput, GFLOPs.
    pub gflops: f64,
    /// Cycles for one sweep: `V·δ + τ`.
    pub cycles_total: u64,
    /// Wall-clock seconds for one sweep at the given clock.
    pub time_s: f64,
    /// Floating-point operations in one sweep: `V·f`.
    pub flops: f64,
    /// Seconds spent moving data, when a transfer model was applied.
    pub transfer_s: Option<f64>,
    /// Throughput including transfer time, when modeled.
    pub effective_gflops: Option<f64>,
}

impl PerfEstimate {
    /// Internal consistency: gflops equals flops/time within rounding.
    pub fn is_consistent(&self) -> bool {
        let recomputed = self.flops / self.time_s / 1e9;
        (self.gflops - recomputed).abs() <= 1e-9 * self.gflops.abs().max(1.0)
    }
}

/// Sustained throughput of a pipelined kernel:
/// `V·f·ν / (V·δ + τ)`, with `cycles_total = V·δ + τ`.
///
/// All inputs must be positive (δ ≥ 1 enforced by [`KernelTiming`];
/// τ = 0 is allowed as the degenerate no-drain case).
pub fn throughput(v: u64, f: u64, nu_hz: f64, delta: u64, tau: u64) -> PerfEstimate {
    assert!(v > 0 && f > 0 && delta > 0, "volume, flops/site, and interval must be positive");
    assert!(nu_hz > 0.0, "clock must be positive");
    let cycles_total = v * delta + tau;
    let time_s = cycles_total as f64 / nu_hz;
    let flops = (v * f) as f64;
    PerfEstimate {
        gflops: flops / time_s / 1e9,
        cycles_total,
        time_s,
        flops,
        transfer_s: None,
        effective_gflops: None,
    }
}

/// Pipeline bound `f·ν/δ` in GFLOPs — the `V → ∞` limit of
/// [`throughput`], where the drain time τ is fully amortized.
pub fn asymptotic_gflops(f: u64, nu_hz: f64, delta: u64) -> f64 {
    assert!(f > 0 && delta > 0 && nu_hz > 0.0);
    f as f64 * nu_hz / delta as f64 / 1e9
}

/// Per-site operation count implied by a published asymptotic
/// throughput: `reported·δ/ν`.
pub fn implied_flops_asymptotic(reported_gflops: f64, nu_hz: f64, delta: u64) -> f64 {
    reported_gflops * 1e9 * delta as f64 / nu_hz
}

/// Per-site operation count implied by a published finite-volume
/// throughput: `reported·(V·δ+τ)/(V·ν)`.
pub fn implied_flops_measured(reported_gflops: f64, v: u64, nu_hz: f64, delta: u64, tau: u64) -> f64 {
    reported_gflops * 1e9 * (v * delta + tau) as f64 / (v as f64 * nu_hz)
}

/// Extend a compute estimate with memory-transfer time.
///
/// One sweep moves `V × stencil_io_bytes` across `ddr_channels` channels
/// of `channel_bandwidth` bytes/s each. When the gauge and spinor data
/// stay resident in device memory across calls, the transfer happens
/// once; otherwise every one of `calls` sweeps pays it. Resident and
/// non-resident totals therefore differ by exactly `(calls − 1)` single
/// transfers.
///
/// Precondition: the profile has a calibrated positive bandwidth.
pub fn with_transfer(
    estimate: &PerfEstimate,
    v: u64,
    profile: &DeviceProfile,
    resident: bool,
    calls: u64,
) -> Result<PerfEstimate, PerfError> {
    if !(profile.channel_bandwidth > 0.0) {
        return Err(PerfError::MissingBandwidth { name: profile.name.clone() });
    }
    assert!(calls >= 1, "at least one sweep is required");
    let bytes_per_sweep = (v as u128 * dirac::stencil_io_bytes() as u128) as f64;
    let total_bandwidth = profile.ddr_channels as f64 * profile.channel_bandwidth;
    let transfer_once = bytes_per_sweep / total_bandwidth;
    let transfers = if resident { 1 } else { calls };
    let transfer_s = transfers as f64 * transfer_once;
    let compute_s = calls as f64 * estimate.time_s;
    let total_flops = calls as f64 * estimate.flops;
    Ok(PerfEstimate {
        gflops: estimate.gflops,
        cycles_total: estimate.cycles_total,
        time_s: estimate.time_s,
        flops: estimate.flops,
        transfer_s: Some(transfer_s),
        effective_gflops: Some(total_flops / (compute_s + transfer_s) / 1e9),
    })
}

/// Result of backing out a transfer bandwidth from a published pair of
/// compute-only and transfer-inclusive throughputs.
#[derive(Clone, Copy, Debug)]
pub struct BandwidthCalibration {
    /// transfer time / compute time implied by the pair.
    pub overhead_ratio: f64,
    /// Aggregate bytes/s over all channels.
    pub total_bandwidth: f64,
    /// Bytes/s per channel.
    pub per_channel_bandwidth: f64,
}

/// Back out channel bandwidth from a (compute-only, with-transfer)
/// throughput pair at volume `v`: the ratio of the two rates fixes the
/// transfer/compute time ratio, the compute rate fixes the sweep time,
/// and the byte ledger fixes the bytes moved.
pub fn calibrate_channel_bandwidth(
    compute_gflops: f64,
    effective_gflops: f64,
    v: u64,
    f: u64,
    ddr_channels: u32,
) -> BandwidthCalibration {
    assert!(compute_gflops > effective_gflops && effective_gflops > 0.0);
    let overhead_ratio = compute_gflops / effective_gflops - 1.0;
    let flops = (v * f) as f64;
    let compute_s = flops / (compute_gflops * 1e9);
    let transfer_s = overhead_ratio * compute_s;
    let bytes = (v as u128 * dirac::stencil_io_bytes() as u128) as f64;
    let total_bandwidth = bytes / transfer_s;
    BandwidthCalibration {
        overhead_ratio,
        total_bandwidth,
        per_channel_bandwidth: total_bandwidth / ddr_channels as f64,
    }
}

/// Resident-memory layout knobs for the footprint model.
#[derive(Clone, Copy, Debug)]
pub struct MemoryLayout {
    /// Copies of each gauge-link array kept for parallel port access
    /// (forward and backward hops read simultaneously).
    pub duplication: u64,
    /// Copies of block-boundary data kept per block.
    pub halo_copies: u64,
    /// Whether payloads are split into separate real/imaginary streams.
    pub channel_split: bool,
}

impl Default for MemoryLayout {
    fn default() -> Self {
        MemoryLayout { duplication: 2, halo_copies: 2, channel_split: false }
    }
}

/// Resident spinor fields assumed by the footprint model: solution,
/// residual, direction, and one temporary.
pub const RESIDENT_SPINOR_FIELDS: u64 = 4;

/// Byte breakdown of the device-resident working set.
#[derive(Clone, Copy, Debug)]
pub struct FootprintReport {
    pub gauge_bytes: u64,
    pub spinor_bytes: u64,
    pub halo_bytes: u64,
    pub total_bytes: u64,
    /// Bytes per stream when real/imaginary parts travel separately.
    pub per_channel_bytes: Option<u64>,
}

/// Device-resident bytes for a lattice under a given layout.
///
/// Gauge links: `duplication × V × 4 × 18 × 8` (four links of nine
/// complex entries per site). Spinors: `4 fields × V × 24 × 8`. Halo:
/// per boundary site, the neighbor spinor plus its four links
/// `(24 + 72) × 8` bytes, summed over both blocks of a two-block time
/// split and multiplied by `halo_copies`.
pub fn memory_footprint(dims: LatticeDims, layout: &MemoryLayout) -> Result<FootprintReport, PerfError> {
    let v = dims.volume() as u64;
    let gauge_bytes = layout.duplication * v * 4 * 18 * 8;
    let spinor_bytes = RESIDENT_SPINOR_FIELDS * v * 24 * 8;
    let blocks = split_blocks(dims, 3)?;
    let halo_sites: u64 = (0..2).map(|b| blocks.halo(b).len() as u64).sum();
    let halo_bytes = layout.halo_copies * halo_sites * (24 + 72) * 8;
    let total_bytes = gauge_bytes + spinor_bytes + halo_bytes;
    Ok(FootprintReport {
        gauge_bytes,
        spinor_bytes,
        halo_bytes,
        total_bytes,
        per_channel_bytes: layout.channel_split.then_some(total_bytes / 2),
    })
}

/// One resource-consumption observation at a given problem size.
#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
pub struct SizeRow {
    pub l: u64,
    pub t: u64,
    pub bram: u64,
    pub dsp: u64,
    pub ff: u64,
    pub lut: u64,
    pub uram: u64,
}

impl SizeRow {
    pub fn volume(&self) -> u64 {
        self.l * self.l * self.l * self.t
    }
}

/// Outcome of one qualitative claim check.
#[derive(Clone, Debug)]
pub struct ClaimCheck {
    pub claim: String,
    pub pass: bool,
    pub detail: String,
}

/// Report of [`resource_scaling_check`].
#[derive(Clone, Debug)]
pub struct ScalingReport {
    pub claims: Vec<ClaimCheck>,
}

impl ScalingReport {
    pub fn pass(&self) -> bool {
        self.claims.iter().all(|c| c.pass)
    }
}

impl fmt::Display for ScalingReport {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        for claim in &self.claims {
            writeln!(out, "{}: {} ({})", claim.claim, if claim.pass { "PASS" } else { "FAIL" }, claim.detail)?;
        }
        Ok(())
    }
}

/// Check the model's qualitative scaling claims against observed
/// resource rows: compute resources (DSP, FF, LUT, BRAM) do not depend
/// on the problem size, while memory blocks (URAM) never shrink as the
/// volume grows.
pub fn resource_scaling_check(rows: &[SizeRow]) -> ScalingReport {
    let mut sorted: Vec<SizeRow> = rows.to_vec();
    sorted.sort_by_key(SizeRow::volume);
    let mut claims = Vec::new();

    let columns: [(&str, fn(&SizeRow) -> u64); 4] =
        [("dsp", |r| r.dsp), ("ff", |r| r.ff), ("lut", |r| r.lut), ("bram", |r| r.bram)];
    for (name, get) in columns {
        let values: Vec<u64> = sorted.iter().map(get).collect();
        let constant = values.windows(2).all(|w| w[0] == w[1]);
        claims.push(ClaimCheck {
            claim: format!("compute resource {name} constant across sizes"),
            pass: constant,
            detail: format!("{values:?}"),
        });
    }

    let urams: Vec<u64> = sorted.iter().map(|r| r.uram).collect();
    let nondecreasing = urams.windows(2).all(|w| w[0] <= w[1]);
    claims.push(ClaimCheck {
        claim: "memory resource uram nondecreasing in volume".to_string(),
        pass: nondecreasing,
        detail: format!("{urams:?}"),
    });

    ScalingReport { claims }
}

/// How a device's modeled throughput stacks up against its published
/// number, with the implied per-site operation count alongside.
#[derive(Clone, Debug)]
pub struct ThroughputComparison {
    pub device: String,
    /// Model throughput at the ledger's f.
    pub model_gflops: f64,
    pub reported_gflops: f64,
    /// |model − reported| / reported.
    pub rel_error: f64,
    /// Per-site count that would make the model reproduce the report.
    pub implied_f: f64,
    /// Ledger count the model used.
    pub ledger_f: u64,
    /// Relative deviation of implied_f from the ledger count.
    pub implied_f_deviation: f64,
    /// Model throughput recomputed at the implied count.
    pub model_at_implied_f: f64,
}

impl ThroughputComparison {
    pub fn within(&self, frac: f64) -> bool {
        self.rel_error <= frac
    }

    /// Whether the implied count differs enough from the ledger to be
    /// worth surfacing (beyond what rounding of the published figure
    /// explains).
    pub fn implied_f_noteworthy(&self) -> bool {
        self.implied_f_deviation > 0.02
    }
}

/// Compare the model against a device's published throughput. Measured
/// rows use the finite-volume formula at `v`; asymptotic capability rows
/// use the pipeline bound, which carries no volume.
pub fn compare_reported(
    profile: &DeviceProfile,
    v: u64,
    f: u64,
) -> Result<Option<ThroughputComparison>, PerfError> {
    let Some(reported) = profile.reported_gflops else {
        return Ok(None);
    };
    let row = profile.timing()?;
    let (model, implied, model_at_implied) = match profile.comparison {
        ComparisonKind::Measured => {
            let model = throughput(v, f, profile.clock_hz, row.interval, row.latency).gflops;
            let implied = implied_flops_measured(reported, v, profile.clock_hz, row.interval, row.latency);
            let at_implied =
                throughput(v, implied.round() as u64, profile.clock_hz, row.interval, row.latency).gflops;
            (model, implied, at_implied)
        }
        ComparisonKind::Asymptotic => {
            let model = asymptotic_gflops(f, profile.clock_hz, row.interval);
            let implied = implied_flops_asymptotic(reported, profile.clock_hz, row.interval);
            let at_implied = asymptotic_gflops(implied.round() as u64, profile.clock_hz, row.interval);
            (model, implied, at_implied)
        }
    };
    Ok(Some(ThroughputComparison {
        device: profile.name.clone(),
        model_gflops: model,
        reported_gflops: reported,
        rel_error: (model - reported).abs() / reported,
        implied_f: implied,
        ledger_f: f,
        implied_f_deviation: (implied - f as f64).abs() / f as f64,
        model_at_implied_f: model_at_implied,
    }))
}

/// The reference problem size the built-in profiles' measured rows refer
/// to.
#[derive(Clone, Copy, Debug, Deserialize)]
pub struct ReferenceVolume {
    pub l: usize,
    pub t: usize,
}

/// A set of device profiles plus resource-scaling fixtures.
#[derive(Clone, Debug, Deserialize)]
pub struct ProfileSet {
    pub reference: ReferenceVolume,
    #[serde(rename = "device")]
    pub devices: Vec<DeviceProfile>,
    pub scaling: Vec<SizeRow>,
}

/// The profile data compiled into the crate.
pub const BUILTIN_PROFILES_TOML: &str = include_str!("../data/profiles.toml");

impl ProfileSet {
    /// Parse a profile set and calibrate any device that has a published
    /// (compute, with-transfer) throughput pair but no explicit channel
    /// bandwidth.
    pub fn from_toml_str(text: &str) -> Result<ProfileSet, PerfError> {
        let mut set: ProfileSet = toml::from_str(text)?;
        let dims = LatticeDims::new(set.reference.l, set.reference.t)?;
        let v = dims.volume() as u64;
        let f = default_flops_per_site();
        for device in &mut set.devices {
            if device.channel_bandwidth <= 0.0 {
                if let (Some(compute), Some(effective)) =
                    (device.reported_gflops, device.reported_effective_gflops)
                {
                    let cal = calibrate_channel_bandwidth(compute, effective, v, f, device.ddr_channels);
                    device.channel_bandwidth = cal.per_channel_bandwidth;
                }
            }
        }
        Ok(set)
    }

    pub fn builtin() -> ProfileSet {
        ProfileSet::from_toml_str(BUILTIN_PROFILES_TOML)
            .expect("built-in profile data must parse")
    }

    pub fn from_path(path: &std::path::Path) -> Result<ProfileSet, PerfError> {
        ProfileSet::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn reference_dims(&self) -> LatticeDims {
        LatticeDims::new(self.reference.l, self.reference.t)
            .expect("profile reference volume must be valid")
    }

    /// Look up a device by name, case-insensitively.
    pub fn get(&self, name: &str) -> Result<&DeviceProfile, PerfError> {
        self.devices
            .iter()
            .find(|d| d.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| PerfError::UnknownDevice {
                name: name.to_string(),
                known: self.devices.iter().map(|d| d.name.clone()).collect(),
            })
    }
}
