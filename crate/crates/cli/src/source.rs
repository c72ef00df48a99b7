//! Right-hand-side construction shared by `apply` and `solve`: a point
//! source (one unit entry, the standard probe) or a seeded random field.

use clap::Args;
use serde_json::json;

use crate::common::{parse_site, Failure};
use crate::record::RunRecord;
use wilson_cg::solver::make_point_source;
use wilson_cg::{lattice, BoundaryCondition, FermionField, LatticeDims};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum SourceKind {
    /// A single 1 in one (site, spin, color) component.
    Point,
    /// Gaussian components drawn from --source-seed.
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum BoundaryArg {
    /// Periodic in all four directions.
    Periodic,
    /// Periodic in space, antiperiodic in time (the fermionic choice).
    Antiperiodic,
}

impl BoundaryArg {
    pub fn condition(self) -> BoundaryCondition {
        match self {
            BoundaryArg::Periodic => BoundaryCondition::Periodic,
            BoundaryArg::Antiperiodic => BoundaryCondition::AntiperiodicTime,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BoundaryArg::Periodic => "periodic",
            BoundaryArg::Antiperiodic => "antiperiodic",
        }
    }
}

#[derive(Args, Debug)]
pub struct SourceArgs {
    /// Right-hand-side kind.
    #[arg(long, value_enum, default_value_t = SourceKind::Point)]
    pub source: SourceKind,
    /// Point-source site coordinates.
    #[arg(long, default_value = "0,0,0,0", value_name = "X,Y,Z,T")]
    pub site: String,
    /// Point-source spin component (0..=3).
    #[arg(long, default_value_t = 0)]
    pub spin: usize,
    /// Point-source color component (0..=2).
    #[arg(long, default_value_t = 0)]
    pub color: usize,
    /// Seed when the source is random.
    #[arg(long, default_value_t = 2)]
    pub source_seed: u64,
}

impl SourceArgs {
    pub fn build(&self, dims: LatticeDims) -> Result<FermionField, Failure> {
        match self.source {
            SourceKind::Point => {
                let coords = parse_site(&self.site)?;
                let index = lattice::site_index(dims, coords)?;
                Ok(make_point_source(dims, index, self.spin, self.color)?)
            }
            SourceKind::Random => Ok(FermionField::random(dims, self.source_seed)),
        }
    }

    pub fn describe(&self, record: &mut RunRecord) {
        match self.source {
            SourceKind::Point => {
                record.param("source", json!("point"));
                record.param("source_site", json!(self.site));
                record.param("source_spin", json!(self.spin));
                record.param("source_color", json!(self.color));
            }
            SourceKind::Random => {
                record.param("source", json!("random"));
                record.param("source_seed", json!(self.source_seed));
            }
        }
    }

    pub fn label(&self) -> String {
        match self.source {
            SourceKind::Point => {
                format!("point source at ({}), spin {}, color {}", self.site, self.spin, self.color)
            }
            SourceKind::Random => format!("random source (seed {})", self.source_seed),
        }
    }
}
