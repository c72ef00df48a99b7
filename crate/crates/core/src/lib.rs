//! Wilson-Dirac operator, conjugate-gradient solver, and analytic
//! kernel-throughput model on 4D lattices.
//!
//! The library implements the nearest-neighbor fermion matrix of lattice
//! QCD in double precision on an `L³×T` grid with gauge links in SU(3):
//!
//! ```text
//! ψ'(n) = ψ(n) + κ Σ_μ [ U_μ(n)(1−γμ)ψ(n+μ̂) + U†_μ(n−μ̂)(1+γμ)ψ(n−μ̂) ]
//! ```
//!
//! together with the pieces a reproducible study of it needs:
//!
//! - exact SU(3)/spinor algebra with fixed summation orders ([`su3`],
//!   [`spinor`]), so results are bit-stable across runs and thread counts;
//! - the operator itself with per-stage operation and byte ledgers
//!   ([`dirac`]), plus a two-block halo decomposition ([`lattice`]);
//! - a conjugate-gradient solver on the normal equations ([`solver`]);
//! - a dense-matrix oracle for small lattices ([`dense`]), used by the
//!   test suites to pin the sparse implementation down;
//! - binary field files with checksums and a split real/imaginary export
//!   ([`io`]);
//! - an analytic pipeline model that turns the ledgers into throughput
//!   and footprint estimates for dataflow hardware ([`perf`]).
//!
//! Deterministic generation is part of the contract: gauge and fermion
//! fields come from a counter-based generator ([`rng`]) whose streams
//! depend only on (seed, site, direction), never on iteration order.

pub mod dense;
pub mod dirac;
pub mod field;
pub mod io;
pub mod lattice;
pub mod perf;
pub mod rng;
pub mod solver;
pub mod spinor;
pub mod su3;

pub use dirac::{
    apply_d, apply_d_blockwise, apply_ddag, apply_normal, kappa_from_mass, stencil_flops_per_site,
    stencil_io_bytes, FlopLedger, StageCounts,
};
pub use field::{FermionField, GaugeField};
pub use lattice::{site_coords, site_index, BoundaryCondition, LatticeDims, NeighborTable};
pub use solver::{cg_normal, make_point_source, SolverParams, SolverResult};
pub use spinor::{Gamma, HalfSpinor, Spinor};
pub use su3::{ColorMatrix, ColorVector, Complex};

/// How whole-field sweeps and reductions are scheduled.
///
/// Site sweeps write disjoint outputs, so both modes produce bit-identical
/// fields; reductions differ only in summation order, with each mode's
/// order fixed independently of the thread count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExecMode {
    /// Sequential sweeps, strictly lexicographic reductions.
    Deterministic,
    /// Thread-parallel sweeps, fixed-chunk-tree reductions.
    Parallel,
}
