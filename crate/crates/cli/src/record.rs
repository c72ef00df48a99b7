//! Machine-readable run records. Every command can write one (`--report`)
//! or print one (`--format json-lines`). All wall-clock-derived numbers
//! live under the single `timing` key, so two records from runs with
//! identical flags in deterministic mode are byte-identical once that one
//! key is dropped — that is the reproducibility contract scripts rely on.

use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::common::Failure;
use wilson_cg::LatticeDims;

#[derive(Serialize)]
pub struct DimsRecord {
    pub l: usize,
    pub t: usize,
}

/// Wall-clock phase times and the rates derived from them. Nothing
/// outside this struct may depend on timing.
#[derive(Default, Serialize)]
pub struct TimingRecord {
    /// Reading input files.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub read_s: Option<f64>,
    /// Building sources, tables, and generated fields.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub setup_s: Option<f64>,
    /// The operative phase: the solve, the sweep, or the bench loop.
    pub run_s: f64,
    /// Writing output files.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub write_s: Option<f64>,
    /// Individual repetition times for bench runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rep_s: Option<Vec<f64>>,
    /// flops_total / run_s / 1e9, the consistency the record guarantees.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub achieved_gflops: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sites_per_s: Option<f64>,
}

#[derive(Serialize)]
pub struct SolverRecord {
    pub iterations: usize,
    pub converged: bool,
    pub normal_residual: f64,
    pub true_residual: f64,
    pub residual_history_len: usize,
    /// FNV-1a 64 of the solution payload bytes; the determinism handle.
    pub psi_checksum: String,
}

/// One run of one command: the echoed parameters, the deterministic
/// results, and the wall-clock numbers off to the side.
#[derive(Serialize)]
pub struct RunRecord {
    pub command: String,
    /// Flags as resolved (a quark mass appears here as its κ).
    pub parameters: Map<String, Value>,
    pub dims: DimsRecord,
    pub volume: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub flops_total: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<Value>,
    /// Deterministic outputs: checksums, norms, file paths.
    pub results: Map<String, Value>,
    pub timing: TimingRecord,
}

impl RunRecord {
    pub fn new(command: &str, dims: LatticeDims) -> RunRecord {
        RunRecord {
            command: command.to_string(),
            parameters: Map::new(),
            dims: DimsRecord { l: dims.l(), t: dims.t() },
            volume: dims.volume(),
            seed: None,
            flops_total: 0,
            solver: None,
            model: None,
            results: Map::new(),
            timing: TimingRecord::default(),
        }
    }

    pub fn param(&mut self, key: &str, value: Value) {
        self.parameters.insert(key.to_string(), value);
    }

    pub fn result(&mut self, key: &str, value: Value) {
        self.results.insert(key.to_string(), value);
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("run records always serialize")
    }

    pub fn write(&self, path: &Path) -> Result<(), Failure> {
        let mut text = serde_json::to_string_pretty(self).expect("run records always serialize");
        text.push('\n');
        std::fs::write(path, text)
            .map_err(|e| Failure::Io(format!("could not write record {}: {e}", path.display())))
    }
}

/// Finish a record: stamp the rates derived from the operative phase,
/// then write and/or print it as the format asks.
pub fn emit(
    record: &mut RunRecord,
    ctx: &crate::common::Ctx,
    print_json_line: bool,
) -> Result<(), Failure> {
    if record.flops_total > 0 && record.timing.run_s > 0.0 {
        record.timing.achieved_gflops =
            Some(record.flops_total as f64 / record.timing.run_s / 1e9);
    }
    if let Some(path) = &ctx.report {
        record.write(path)?;
    }
    if print_json_line && ctx.format == crate::common::OutputFormat::JsonLines {
        println!("{}", record.to_json_line());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_drop_to_identical_json_without_the_timing_key() {
        let dims = LatticeDims::new(4, 8).unwrap();
        let build = |run_s: f64| {
            let mut r = RunRecord::new("solve", dims);
            r.param("kappa", serde_json::json!(0.125));
            r.flops_total = 42;
            r.timing.run_s = run_s;
            serde_json::to_value(&r).unwrap()
        };
        let mut a = build(1.0);
        let mut b = build(2.0);
        assert_ne!(a, b);
        a.as_object_mut().unwrap().remove("timing");
        b.as_object_mut().unwrap().remove("timing");
        assert_eq!(a, b);
    }

    #[test]
    fn achieved_rate_is_the_flop_count_over_the_run_phase() {
        let dims = LatticeDims::new(2, 2).unwrap();
        let ctx = crate::common::Ctx {
            format: crate::common::OutputFormat::Human,
            deterministic: true,
            report: None,
        };
        let mut r = RunRecord::new("bench", dims);
        r.flops_total = 3_000_000_000;
        r.timing.run_s = 2.0;
        emit(&mut r, &ctx, false).unwrap();
        assert_eq!(r.timing.achieved_gflops, Some(1.5));
    }
}
