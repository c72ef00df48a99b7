//! Shared command plumbing: failure-to-exit-code mapping, output format
//! selection, and small parsers for flag values (clock rates, site
//! coordinates, the κ/m_q coupling choice).

use std::path::PathBuf;

use wilson_cg::io::IoError;
use wilson_cg::lattice::GeometryError;
use wilson_cg::perf::PerfError;
use wilson_cg::solver::SolverError;
use wilson_cg::{kappa_from_mass, ExecMode, LatticeDims};

/// A command failure with its process exit code. `0` is success; the
/// nonzero codes distinguish the three ways a run can go wrong.
#[derive(Debug)]
pub enum Failure {
    /// Invalid flags or invalid input data (exit 2).
    Validation(String),
    /// Filesystem trouble: missing, unreadable, or unwritable files (exit 3).
    Io(String),
    /// The solver stopped without reaching the residual target (exit 4).
    NonConvergence(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Io(_) => 3,
            Failure::NonConvergence(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Io(m) | Failure::NonConvergence(m) => m,
        }
    }
}

impl From<GeometryError> for Failure {
    fn from(e: GeometryError) -> Failure {
        Failure::Validation(e.to_string())
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Failure {
        match e {
            // Only a filesystem failure is an I/O exit; a file that reads
            // fine but holds bad content is invalid input.
            IoError::Io(_) => Failure::Io(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Failure {
        match e {
            SolverError::Breakdown { .. } => Failure::NonConvergence(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<PerfError> for Failure {
    fn from(e: PerfError) -> Failure {
        match e {
            PerfError::Io(_) => Failure::Io(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

/// How results are printed. Human tables by default; the machine formats
/// exist so bench and model output can feed plotting scripts directly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    /// Aligned key/value lines and small tables.
    Human,
    /// Comma-separated rows with a header line.
    Csv,
    /// One JSON object per line (the run record).
    JsonLines,
}

/// Flags shared by every subcommand, resolved once in `main`.
pub struct Ctx {
    pub format: OutputFormat,
    pub deterministic: bool,
    pub report: Option<PathBuf>,
}

impl Ctx {
    pub fn mode(&self) -> ExecMode {
        if self.deterministic {
            ExecMode::Deterministic
        } else {
            ExecMode::Parallel
        }
    }

    pub fn mode_name(&self) -> &'static str {
        match self.mode() {
            ExecMode::Deterministic => "deterministic",
            ExecMode::Parallel => "parallel",
        }
    }
}

/// Pick the coupling from `--kappa` or `--mq` (exactly one must be given);
/// a bare quark mass goes through κ = 1/(2(m_q + 4)).
pub fn resolve_kappa(kappa: Option<f64>, mq: Option<f64>) -> Result<f64, Failure> {
    match (kappa, mq) {
        (Some(k), None) => Ok(k),
        (None, Some(m)) => Ok(kappa_from_mass(m)),
        (Some(_), Some(_)) => {
            Err(Failure::Validation("--kappa and --mq are mutually exclusive".into()))
        }
        (None, None) => Err(Failure::Validation("one of --kappa or --mq is required".into())),
    }
}

/// Parse a clock rate like `150MHz`, `1.5GHz`, `150e6`, or a bare count
/// of Hz. Suffixes are case-insensitive.
pub fn parse_clock(text: &str) -> Result<f64, Failure> {
    let trimmed = text.trim();
    let lower = trimmed.to_ascii_lowercase();
    let (digits, scale) = if let Some(stem) = lower.strip_suffix("ghz") {
        (stem, 1e9)
    } else if let Some(stem) = lower.strip_suffix("mhz") {
        (stem, 1e6)
    } else if let Some(stem) = lower.strip_suffix("khz") {
        (stem, 1e3)
    } else if let Some(stem) = lower.strip_suffix("hz") {
        (stem, 1.0)
    } else {
        (lower.as_str(), 1.0)
    };
    let value: f64 = digits
        .trim()
        .parse()
        .map_err(|_| Failure::Validation(format!("unreadable clock rate {trimmed:?}")))?;
    if !(value > 0.0) {
        return Err(Failure::Validation(format!("clock rate must be positive, got {trimmed:?}")));
    }
    Ok(value * scale)
}

/// Parse a site as four comma-separated coordinates `x,y,z,t`.
pub fn parse_site(text: &str) -> Result<[usize; 4], Failure> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(Failure::Validation(format!(
            "a site needs four comma-separated coordinates x,y,z,t, got {text:?}"
        )));
    }
    let mut coords = [0usize; 4];
    for (slot, part) in coords.iter_mut().zip(&parts) {
        *slot = part
            .parse()
            .map_err(|_| Failure::Validation(format!("unreadable coordinate {part:?} in {text:?}")))?;
    }
    Ok(coords)
}

/// `6^3 x 8`-style label for human output.
pub fn dims_label(dims: LatticeDims) -> String {
    format!("{}^3 x {}", dims.l(), dims.t())
}

/// Bytes with a binary-unit suffix for human output.
pub fn human_bytes(bytes: u64) -> String {
    const UNITS: [&str; 4] = ["B", "KiB", "MiB", "GiB"];
    let mut value = bytes as f64;
    let mut unit = 0;
    while value >= 1024.0 && unit + 1 < UNITS.len() {
        value /= 1024.0;
        unit += 1;
    }
    if unit == 0 {
        format!("{bytes} B")
    } else {
        format!("{value:.2} {}", UNITS[unit])
    }
}
