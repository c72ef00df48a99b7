//! The Wilson-Dirac operator and its instrumented stencil.
//!
//! At every site `n` the operator computes
//!
//! ```text
//! psi'(n) = psi(n) + kappa * sum_mu [ U_mu(n) (1 - gamma_mu) psi(n + mu)
//!                                   + U_mu(n - mu)^dag (1 + gamma_mu) psi(n - mu) ]
//! ```
//!
//! with the hopping parameter `kappa = 1 / (2 (m_q + 4))`. The stencil is
//! organized as four pipeline stages:
//!
//! 1. gather the 8 links and 9 spinors (copies only, no arithmetic);
//! 2. spin-project each neighbor to a half spinor — 16 color-vector
//!    additions, 96 real operations;
//! 3. multiply each half spinor by the link and rescale by `kappa` — 16
//!    matrix-vector products at 72 real operations each, 1152 in total;
//! 4. reconstruct the eight full-spinor contributions (routing only) and
//!    accumulate them together with `psi(n)` — 9 spinor additions into a
//!    zeroed accumulator, 216 real operations.
//!
//! Every floating-point operation is tallied as it happens, per stage and
//! per class (real add / real mul); the per-site total is 1464. The same
//! code path runs with or without the tally (the no-op tally compiles away),
//! so instrumented and plain applications are bit-identical.
//!
//! Because the projectors have rank 2, stage 3 needs only 16 matrix-vector
//! products instead of the 32 a four-component path would use;
//! [`apply_stencil_unprojected`] keeps that naive path alive as a reference.

use crate::field::{FermionField, GaugeField};
use crate::lattice::{BlockDecomposition, BoundaryCondition, LatticeDims, NeighborTable};
use crate::spinor::{project, project_dense, reconstruct, HalfSpinor, Sign, Spinor, PROJECT_ADDS};
use crate::su3::{adj_mat_vec, mat_vec, ColorMatrix, MAT_VEC_ADDS, MAT_VEC_MULS, VEC_ADD_ADDS, VEC_SCALE_MULS};
use crate::ExecMode;
use rayon::prelude::*;
use std::sync::OnceLock;

/// Real additions in one spinor + spinor.
pub const SPINOR_ADD_ADDS: u64 = 4 * VEC_ADD_ADDS;

/// Exact operation counts for one class of work.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub adds: u64,
    pub muls: u64,
}

impl OpCounts {
    pub fn total(&self) -> u64 {
        self.adds + self.muls
    }
}

/// Per-stage operation counts for one stencil application.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StageCounts {
    /// Indexed by pipeline stage (0-based: `stages[2]` is stage 3).
    pub stages: [OpCounts; 4],
    /// Matrix-vector products performed (adjoint products included).
    pub mat_vec_calls: u64,
}

impl StageCounts {
    /// Total real operations in 1-based stage `stage`.
    pub fn stage_total(&self, stage: usize) -> u64 {
        assert!((1..=4).contains(&stage), "stages are numbered 1..=4");
        self.stages[stage - 1].total()
    }

    pub fn total(&self) -> u64 {
        self.stages.iter().map(|s| s.total()).sum()
    }

    pub fn total_adds(&self) -> u64 {
        self.stages.iter().map(|s| s.adds).sum()
    }

    pub fn total_muls(&self) -> u64 {
        self.stages.iter().map(|s| s.muls).sum()
    }
}

/// Aggregate flop counter for whole-field operations and solver runs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FlopLedger {
    pub real_add: u64,
    pub real_mul: u64,
}

impl FlopLedger {
    pub fn new() -> FlopLedger {
        FlopLedger::default()
    }

    pub fn total(&self) -> u64 {
        self.real_add + self.real_mul
    }

    pub fn tally(&mut self, adds: u64, muls: u64) {
        self.real_add += adds;
        self.real_mul += muls;
    }

    /// Account for `n` stencil applications.
    pub fn tally_stencil_sites(&mut self, n: u64) {
        let per_site = stencil_flops_per_site();
        self.real_add += n * per_site.total_adds();
        self.real_mul += n * per_site.total_muls();
    }

    pub fn merge(&mut self, other: &FlopLedger) {
        self.real_add += other.real_add;
        self.real_mul += other.real_mul;
    }
}

/// Operation sink threaded through the stencil. The no-op implementation
/// lets the exact same code run untallied at full speed.
trait Tally {
    fn op(&mut self, stage: usize, adds: u64, muls: u64);
    fn mat_vec_call(&mut self);
}

struct NoTally;

impl Tally for NoTally {
    #[inline(always)]
    fn op(&mut self, _stage: usize, _adds: u64, _muls: u64) {}
    #[inline(always)]
    fn mat_vec_call(&mut self) {}
}

#[derive(Default)]
struct StageTally {
    counts: StageCounts,
}

impl Tally for StageTally {
    #[inline]
    fn op(&mut self, stage: usize, adds: u64, muls: u64) {
        self.counts.stages[stage].adds += adds;
        self.counts.stages[stage].muls += muls;
    }
    #[inline]
    fn mat_vec_call(&mut self) {
        self.counts.mat_vec_calls += 1;
    }
}

/// `kappa` from the quark mass: `1 / (2 (m_q + 4))`.
pub fn kappa_from_mass(mq: f64) -> f64 {
    0.5 / (mq + 4.0)
}

/// Bytes of spinor input read by one stencil: the site itself plus its
/// eight neighbors. Derived from the in-memory type, not hard-coded.
pub fn stencil_input_spinor_bytes() -> usize {
    9 * std::mem::size_of::<Spinor>()
}

/// Bytes of gauge input read by one stencil: eight links.
pub fn stencil_input_gauge_bytes() -> usize {
    8 * std::mem::size_of::<ColorMatrix>()
}

/// Total input bytes per stencil (9 spinors + 8 links in doubles).
pub fn stencil_io_bytes() -> usize {
    stencil_input_spinor_bytes() + stencil_input_gauge_bytes()
}

/// The invariant per-site operation counts, measured by running the
/// instrumented stencil once (they are independent of the field data).
pub fn stencil_flops_per_site() -> &'static StageCounts {
    static COUNTS: OnceLock<StageCounts> = OnceLock::new();
    COUNTS.get_or_init(|| {
        let dims = LatticeDims::new(2, 2).expect("2^3 x 2 is a valid lattice");
        let table = NeighborTable::build(dims, BoundaryCondition::Periodic);
        let gauge = GaugeField::unit(dims);
        let psi = FermionField::zero(dims);
        let (_, counts) = apply_stencil_staged(&gauge, &psi, &table, 0.125, 0);
        counts
    })
}

fn check_dims(gauge: &GaugeField, psi: &FermionField, table: &NeighborTable) {
    assert_eq!(
        gauge.dims(),
        psi.dims(),
        "gauge and fermion fields must share lattice dimensions"
    );
    assert_eq!(
        gauge.dims(),
        table.dims(),
        "neighbor table was built for different lattice dimensions"
    );
}

/// One stencil, one code path; the tally parameter decides whether the
/// operations are counted.
fn stencil_site<T: Tally>(
    gauge: &GaugeField,
    psi: &FermionField,
    table: &NeighborTable,
    kappa: f64,
    n: usize,
    tally: &mut T,
) -> Spinor {
    // Stage 1: gather. Boundary signs are imposed on the link matrices;
    // sign flips are routing, not arithmetic.
    let psi_n = *psi.site(n);
    let mut u_fwd = [ColorMatrix::ZERO; 4];
    let mut u_bwd = [ColorMatrix::ZERO; 4];
    let mut psi_fwd = [Spinor::ZERO; 4];
    let mut psi_bwd = [Spinor::ZERO; 4];
    for mu in 0..4 {
        let up = table.fwd(n, mu);
        let down = table.bwd(n, mu);
        let uf = *gauge.link(n, mu);
        u_fwd[mu] = if table.fwd_sign(n, mu) < 0.0 { uf.negated() } else { uf };
        let ub = *gauge.link(down, mu);
        u_bwd[mu] = if table.bwd_sign(n, mu) < 0.0 { ub.negated() } else { ub };
        psi_fwd[mu] = *psi.site(up);
        psi_bwd[mu] = *psi.site(down);
    }

    // Stage 2: project every neighbor to its two independent spin
    // components: 1 - gamma_mu toward +mu, 1 + gamma_mu toward -mu.
    let mut h_fwd = [HalfSpinor([crate::su3::ColorVector::ZERO; 2]); 4];
    let mut h_bwd = [HalfSpinor([crate::su3::ColorVector::ZERO; 2]); 4];
    for mu in 0..4 {
        h_fwd[mu] = project(mu, Sign::Minus, &psi_fwd[mu]);
        tally.op(1, PROJECT_ADDS, 0);
        h_bwd[mu] = project(mu, Sign::Plus, &psi_bwd[mu]);
        tally.op(1, PROJECT_ADDS, 0);
    }

    // Stage 3: one matrix-vector product per kept component, forward with
    // the link, backward with its adjoint, each rescaled by kappa.
    let mut w_fwd = h_fwd;
    let mut w_bwd = h_bwd;
    for mu in 0..4 {
        for c in 0..2 {
            w_fwd[mu].0[c] = mat_vec(&u_fwd[mu], &h_fwd[mu].0[c]).scale(kappa);
            tally.op(2, MAT_VEC_ADDS, MAT_VEC_MULS + VEC_SCALE_MULS);
            tally.mat_vec_call();
        }
        for c in 0..2 {
            w_bwd[mu].0[c] = adj_mat_vec(&u_bwd[mu], &h_bwd[mu].0[c]).scale(kappa);
            tally.op(2, MAT_VEC_ADDS, MAT_VEC_MULS + VEC_SCALE_MULS);
            tally.mat_vec_call();
        }
    }

    // Stage 4: reconstruct each contribution (routing only) and add up all
    // nine terms into a zeroed accumulator, in fixed order.
    let mut acc = Spinor::ZERO;
    acc = acc.add(&psi_n);
    tally.op(3, SPINOR_ADD_ADDS, 0);
    for mu in 0..4 {
        acc = acc.add(&reconstruct(mu, Sign::Minus, &w_fwd[mu]));
        tally.op(3, SPINOR_ADD_ADDS, 0);
        acc = acc.add(&reconstruct(mu, Sign::Plus, &w_bwd[mu]));
        tally.op(3, SPINOR_ADD_ADDS, 0);
    }
    acc
}

/// The Wilson-Dirac stencil at site `n`.
pub fn apply_stencil(
    gauge: &GaugeField,
    psi: &FermionField,
    table: &NeighborTable,
    kappa: f64,
    n: usize,
) -> Spinor {
    check_dims(gauge, psi, table);
    stencil_site(gauge, psi, table, kappa, n, &mut NoTally)
}

/// The stencil with its per-stage operation counts. Bit-identical to
/// [`apply_stencil`] (same code path).
pub fn apply_stencil_staged(
    gauge: &GaugeField,
    psi: &FermionField,
    table: &NeighborTable,
    kappa: f64,
    n: usize,
) -> (Spinor, StageCounts) {
    check_dims(gauge, psi, table);
    let mut tally = StageTally::default();
    let out = stencil_site(gauge, psi, table, kappa, n, &mut tally);
    (out, tally.counts)
}

/// Reference stencil without the half-spinor shortcut: the projector is
/// applied densely and the link multiplies all four spin components, costing
/// twice the matrix-vector products (32 instead of 16). Returns the result
/// and the number of matrix-vector calls made.
pub fn apply_stencil_unprojected(
    gauge: &GaugeField,
    psi: &FermionField,
    table: &NeighborTable,
    kappa: f64,
    n: usize,
) -> (Spinor, u64) {
    check_dims(gauge, psi, table);
    let mut calls = 0u64;
    let mut acc = *psi.site(n);
    for mu in 0..4 {
        let up = table.fwd(n, mu);
        let down = table.bwd(n, mu);
        let uf = *gauge.link(n, mu);
        let u_fwd = if table.fwd_sign(n, mu) < 0.0 { uf.negated() } else { uf };
        let ub = *gauge.link(down, mu);
        let u_bwd = if table.bwd_sign(n, mu) < 0.0 { ub.negated() } else { ub };

        let phi_fwd = project_dense(mu, Sign::Minus, psi.site(up));
        let mut term = Spinor::ZERO;
        for s in 0..4 {
            term.0[s] = mat_vec(&u_fwd, &phi_fwd.0[s]).scale(kappa);
            calls += 1;
        }
        acc = acc.add(&term);

        let phi_bwd = project_dense(mu, Sign::Plus, psi.site(down));
        let mut term = Spinor::ZERO;
        for s in 0..4 {
            term.0[s] = adj_mat_vec(&u_bwd, &phi_bwd.0[s]).scale(kappa);
            calls += 1;
        }
        acc = acc.add(&term);
    }
    (acc, calls)
}

fn apply_sites(
    gauge: &GaugeField,
    psi: &FermionField,
    table: &NeighborTable,
    kappa: f64,
    mode: ExecMode,
) -> FermionField {
    let v = gauge.dims().volume();
    let sites: Vec<Spinor> = match mode {
        ExecMode::Deterministic => (0..v)
            .map(|n| stencil_site(gauge, psi, table, kappa, n, &mut NoTally))
            .collect(),
        // Sites are independent, so the parallel sweep is bit-identical to
        // the sequential one regardless of thread count.
        ExecMode::Parallel => (0..v)
            .into_par_iter()
            .map(|n| stencil_site(gauge, psi, table, kappa, n, &mut NoTally))
            .collect(),
    };
    FermionField::from_sites(gauge.dims(), sites)
}

/// Apply `D` to a whole field.
pub fn apply_d(
    gauge: &GaugeField,
    psi: &FermionField,
    table: &NeighborTable,
    kappa: f64,
    mode: ExecMode,
) -> FermionField {
    check_dims(gauge, psi, table);
    apply_sites(gauge, psi, table, kappa, mode)
}

/// Apply `D^dag` via the gamma5 identity `D^dag = gamma5 D gamma5`.
pub fn apply_ddag(
    gauge: &GaugeField,
    psi: &FermionField,
    table: &NeighborTable,
    kappa: f64,
    mode: ExecMode,
) -> FermionField {
    check_dims(gauge, psi, table);
    apply_sites(gauge, &psi.gamma5(), table, kappa, mode).gamma5()
}

/// Apply the normal operator `D D^dag` (hermitian positive definite).
pub fn apply_normal(
    gauge: &GaugeField,
    psi: &FermionField,
    table: &NeighborTable,
    kappa: f64,
    mode: ExecMode,
) -> FermionField {
    let w = apply_ddag(gauge, psi, table, kappa, mode);
    apply_d(gauge, &w, table, kappa, mode)
}

/// Apply `D` block by block: each block works on a fresh local copy holding
/// only its own sites plus its halo, the way a distributed sweep would. All
/// other sites in the copy are zeroed, so any out-of-halo read would show up
/// as a wrong result rather than pass silently. Output is bit-identical to
/// [`apply_d`].
pub fn apply_d_blockwise(
    gauge: &GaugeField,
    psi: &FermionField,
    table: &NeighborTable,
    kappa: f64,
    decomp: &BlockDecomposition,
) -> FermionField {
    check_dims(gauge, psi, table);
    let dims = gauge.dims();
    let mut out = FermionField::zero(dims);
    for b in 0..2 {
        let mut local_psi = FermionField::zero(dims);
        let mut local_gauge = GaugeField::zeroed(dims);
        for &s in decomp.block(b).iter().chain(decomp.halo(b).iter()) {
            *local_psi.site_mut(s) = *psi.site(s);
            for mu in 0..4 {
                *local_gauge.link_mut(s, mu) = *gauge.link(s, mu);
            }
        }
        for &s in decomp.block(b) {
            *out.site_mut(s) = stencil_site(&local_gauge, &local_psi, table, kappa, s, &mut NoTally);
        }
    }
    out
}
