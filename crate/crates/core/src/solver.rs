//! Conjugate gradient on the normal equations.
//!
//! The Wilson operator `D` is not hermitian, but `gamma5 D gamma5 = D^dag`
//! makes `D D^dag` hermitian positive definite. To solve `D psi = eta` we
//! run CG on the normal system
//!
//! ```text
//! (D D^dag) y = eta,     psi = D^dag y
//! ```
//!
//! with the standard recurrences (`<.,.>` is the global hermitian inner
//! product; all scalars below are real):
//!
//! ```text
//! r = eta - D D^dag y0;  p = r;  rho = <r, r>
//! repeat while sqrt(rho) > tol * |eta|:
//!     w     = D^dag p
//!     alpha = rho / <w, w>
//!     y    += alpha p
//!     r    -= alpha D w
//!     beta  = <r, r>_new / rho
//!     p     = r + beta p
//! ```
//!
//! Convergence is judged on the recursive residual of the normal system,
//! then re-verified from scratch against the outer system: the reported
//! `true_residual` is `|D psi - eta| / |eta|` recomputed at the end, and
//! `converged` is only set when that, too, meets the tolerance.
//!
//! Reductions are ordered deterministically: sequential in lexicographic
//! site order in [`ExecMode::Deterministic`], fixed-size chunks combined in
//! chunk order in [`ExecMode::Parallel`] — both independent of thread count.

use crate::dirac::{apply_d, apply_ddag, FlopLedger};
use crate::field::{FermionField, GaugeField};
use crate::lattice::{LatticeDims, NeighborTable};
use crate::su3::{Complex, C_ZERO};
use crate::ExecMode;
use rayon::prelude::*;
use thiserror::Error;

/// Sites per reduction chunk in parallel mode. Fixed so that the reduction
/// tree, and therefore the rounding, does not depend on the thread count.
const DOT_CHUNK: usize = 256;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("fields have different lattice dimensions")]
    DimMismatch,
    #[error("source component out of range: site {site}, spin {spin}, color {color}")]
    SourceOutOfRange { site: usize, spin: usize, color: usize },
    #[error("solver parameters invalid: {reason}")]
    InvalidParams { reason: String },
    #[error("CG breakdown at iteration {iteration}: <D^dag p, D^dag p> = {value}")]
    Breakdown { iteration: usize, value: f64 },
}

#[derive(Clone, Debug)]
pub struct SolverParams {
    /// Relative residual target for `|D psi - eta| / |eta|`.
    pub tol: f64,
    pub max_iter: usize,
    /// Starting guess for the normal-system unknown `y` (zero if absent).
    pub initial_guess: Option<FermionField>,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams { tol: 1e-10, max_iter: 10_000, initial_guess: None }
    }
}

#[derive(Clone, Debug)]
pub struct SolverResult {
    pub psi: FermionField,
    /// CG iterations performed.
    pub iterations: usize,
    /// Relative recursive residual before each iteration plus the final one
    /// (length `iterations + 1`).
    pub residual_history: Vec<f64>,
    pub converged: bool,
    /// Final relative recursive residual of the normal system.
    pub normal_residual: f64,
    /// `|D psi - eta| / |eta|`, recomputed from scratch at the end.
    pub true_residual: f64,
    /// Total real floating-point operations, operator and vector work alike.
    pub flops_total: u64,
}

/// Hermitian inner product `sum conj(a_i) b_i` over all components.
pub fn dot(a: &FermionField, b: &FermionField, mode: ExecMode) -> Result<Complex, SolverError> {
    if a.dims() != b.dims() {
        return Err(SolverError::DimMismatch);
    }
    let site_dot = |pair: (&crate::spinor::Spinor, &crate::spinor::Spinor)| -> Complex {
        let (sa, sb) = pair;
        let mut acc = C_ZERO;
        for spin in 0..4 {
            acc += sa.0[spin].dot(&sb.0[spin]);
        }
        acc
    };
    let total = match mode {
        ExecMode::Deterministic => a
            .sites()
            .iter()
            .zip(b.sites().iter())
            .map(site_dot)
            .fold(C_ZERO, |acc, z| acc + z),
        ExecMode::Parallel => {
            let partials: Vec<Complex> = a
                .sites()
                .par_chunks(DOT_CHUNK)
                .zip(b.sites().par_chunks(DOT_CHUNK))
                .map(|(ca, cb)| {
                    ca.iter().zip(cb.iter()).map(site_dot).fold(C_ZERO, |acc, z| acc + z)
                })
                .collect();
            partials.into_iter().fold(C_ZERO, |acc, z| acc + z)
        }
    };
    Ok(total)
}

/// Squared 2-norm, summed in the same fixed orders as [`dot`].
pub fn norm_sq(a: &FermionField, mode: ExecMode) -> f64 {
    let site_norm = |s: &crate::spinor::Spinor| s.norm_sq();
    match mode {
        ExecMode::Deterministic => a.sites().iter().map(site_norm).sum(),
        ExecMode::Parallel => {
            let partials: Vec<f64> = a
                .sites()
                .par_chunks(DOT_CHUNK)
                .map(|chunk| chunk.iter().map(site_norm).sum::<f64>())
                .collect();
            partials.into_iter().sum()
        }
    }
}

/// Point source: a single 1 in component (site, spin, color).
pub fn make_point_source(
    dims: LatticeDims,
    site: usize,
    spin: usize,
    color: usize,
) -> Result<FermionField, SolverError> {
    if site >= dims.volume() || spin >= 4 || color >= 3 {
        return Err(SolverError::SourceOutOfRange { site, spin, color });
    }
    let mut f = FermionField::zero(dims);
    f.site_mut(site).0[spin].0[color] = Complex { re: 1.0, im: 0.0 };
    Ok(f)
}

// Flop costs of the vector operations, in real operations per lattice site
// (12 complex components each): see the field methods they mirror.
const NORM_FLOPS_PER_SITE: u64 = 12 * 4; // re^2 + im^2 and accumulate
const AXPY_FLOPS_PER_SITE: u64 = 12 * 4; // scale (2 muls) + add (2 adds)
const SUB_FLOPS_PER_SITE: u64 = 12 * 2;

/// Solve `D psi = eta` by CG on the normal equations. See module docs for
/// the exact recurrences and stopping rule.
pub fn cg_normal(
    gauge: &GaugeField,
    eta: &FermionField,
    kappa: f64,
    params: &SolverParams,
    table: &NeighborTable,
    mode: ExecMode,
) -> Result<SolverResult, SolverError> {
    cg_normal_observed(gauge, eta, kappa, params, table, mode, |_, _| {})
}

/// [`cg_normal`] with a per-iteration observer `(iteration, y_k)`; the hook
/// exists so convergence diagnostics can watch the normal-system iterate.
pub fn cg_normal_observed<F>(
    gauge: &GaugeField,
    eta: &FermionField,
    kappa: f64,
    params: &SolverParams,
    table: &NeighborTable,
    mode: ExecMode,
    mut observe: F,
) -> Result<SolverResult, SolverError>
where
    F: FnMut(usize, &FermionField),
{
    if gauge.dims() != eta.dims() {
        return Err(SolverError::DimMismatch);
    }
    if !(params.tol > 0.0) {
        return Err(SolverError::InvalidParams { reason: format!("tol must be > 0, got {}", params.tol) });
    }
    if let Some(guess) = &params.initial_guess {
        if guess.dims() != eta.dims() {
            return Err(SolverError::DimMismatch);
        }
    }

    let dims = eta.dims();
    let v = dims.volume() as u64;
    let mut ledger = FlopLedger::new();
    let tally_norm =
        |ledger: &mut FlopLedger| ledger.tally(v * NORM_FLOPS_PER_SITE / 2, v * NORM_FLOPS_PER_SITE / 2);

    let eta_norm = norm_sq(eta, mode).sqrt();
    tally_norm(&mut ledger);
    if eta_norm == 0.0 {
        // Zero source: the zero field is the exact solution.
        return Ok(SolverResult {
            psi: FermionField::zero(dims),
            iterations: 0,
            residual_history: vec![0.0],
            converged: true,
            normal_residual: 0.0,
            true_residual: 0.0,
            flops_total: ledger.total(),
        });
    }

    // y is the normal-system unknown; psi = D^dag y at the end.
    let mut y = match &params.initial_guess {
        Some(guess) => guess.clone(),
        None => FermionField::zero(dims),
    };
    let mut r = match &params.initial_guess {
        Some(_) => {
            // r = eta - D D^dag y
            let w = apply_ddag(gauge, &y, table, kappa, mode);
            let dw = apply_d(gauge, &w, table, kappa, mode);
            ledger.tally_stencil_sites(2 * v);
            ledger.tally(v * SUB_FLOPS_PER_SITE, 0);
            eta.sub(&dw)
        }
        None => eta.clone(),
    };

    let mut p = r.clone();
    let mut rho = norm_sq(&r, mode);
    tally_norm(&mut ledger);
    let target = params.tol * eta_norm;
    let mut history = vec![rho.sqrt() / eta_norm];

    let mut iterations = 0;
    while rho.sqrt() > target && iterations < params.max_iter {
        // w = D^dag p; alpha = rho / <w, w>
        let w = apply_ddag(gauge, &p, table, kappa, mode);
        ledger.tally_stencil_sites(v);
        let sigma = norm_sq(&w, mode);
        tally_norm(&mut ledger);
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(SolverError::Breakdown { iteration: iterations, value: sigma });
        }
        let alpha = rho / sigma;

        y.axpy(alpha, &p);
        ledger.tally(v * AXPY_FLOPS_PER_SITE / 2, v * AXPY_FLOPS_PER_SITE / 2);

        // r -= alpha * D w  (D w = D D^dag p)
        let dw = apply_d(gauge, &w, table, kappa, mode);
        ledger.tally_stencil_sites(v);
        r.axpy(-alpha, &dw);
        ledger.tally(v * AXPY_FLOPS_PER_SITE / 2, v * AXPY_FLOPS_PER_SITE / 2);

        let rho_new = norm_sq(&r, mode);
        tally_norm(&mut ledger);
        let beta = rho_new / rho;
        p.xpay(&r, beta);
        ledger.tally(v * AXPY_FLOPS_PER_SITE / 2, v * AXPY_FLOPS_PER_SITE / 2);

        rho = rho_new;
        iterations += 1;
        history.push(rho.sqrt() / eta_norm);
        observe(iterations, &y);
    }

    let normal_residual = rho.sqrt() / eta_norm;

    // Back out psi and re-verify against the outer system from scratch.
    let psi = apply_ddag(gauge, &y, table, kappa, mode);
    ledger.tally_stencil_sites(v);
    let check = apply_d(gauge, &psi, table, kappa, mode);
    ledger.tally_stencil_sites(v);
    let diff = check.sub(eta);
    ledger.tally(v * SUB_FLOPS_PER_SITE, 0);
    let true_residual = norm_sq(&diff, mode).sqrt() / eta_norm;
    tally_norm(&mut ledger);

    let converged = normal_residual <= params.tol && true_residual <= params.tol;

    Ok(SolverResult {
        psi,
        iterations,
        residual_history: history,
        converged,
        normal_residual,
        true_residual,
        flops_total: ledger.total(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::BoundaryCondition;

    fn setup(l: usize, t: usize) -> (LatticeDims, NeighborTable) {
        let dims = LatticeDims::new(l, t).unwrap();
        let table = NeighborTable::build(dims, BoundaryCondition::Periodic);
        (dims, table)
    }

    /// Naive reference for the inner product: component loop in index
    /// order, no chunking.
    fn dot_reference(a: &FermionField, b: &FermionField) -> Complex {
        let mut acc = C_ZERO;
        for n in 0..a.dims().volume() {
            for spin in 0..4 {
                for color in 0..3 {
                    let za = a.site(n).0[spin].0[color];
                    let zb = b.site(n).0[spin].0[color];
                    acc += za.conj() * zb;
                }
            }
        }
        acc
    }

    #[test]
    fn dot_of_point_sources() {
        let (dims, _) = setup(2, 2);
        let e = make_point_source(dims, 3, 1, 2).unwrap();
        let d = dot(&e, &e, ExecMode::Deterministic).unwrap();
        assert_eq!(d, Complex { re: 1.0, im: 0.0 });
        let other = make_point_source(dims, 3, 1, 1).unwrap();
        assert_eq!(dot(&e, &other, ExecMode::Deterministic).unwrap(), C_ZERO);
    }

    #[test]
    fn dot_matches_naive_loop() {
        let (dims, _) = setup(4, 4);
        let a = FermionField::random(dims, 1);
        let b = FermionField::random(dims, 2);
        let want = dot_reference(&a, &b);
        for mode in [ExecMode::Deterministic, ExecMode::Parallel] {
            let got = dot(&a, &b, mode).unwrap();
            assert!(
                (got - want).norm() <= 1e-13 * want.norm().max(1.0),
                "{mode:?}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn dot_rejects_mismatched_dims() {
        let a = FermionField::zero(LatticeDims::new(2, 2).unwrap());
        let b = FermionField::zero(LatticeDims::new(2, 4).unwrap());
        assert!(matches!(dot(&a, &b, ExecMode::Deterministic), Err(SolverError::DimMismatch)));
    }

    #[test]
    fn norm_is_positive_definite() {
        let (dims, _) = setup(2, 4);
        let a = FermionField::random(dims, 5);
        assert!(norm_sq(&a, ExecMode::Deterministic) > 0.0);
        assert_eq!(norm_sq(&FermionField::zero(dims), ExecMode::Deterministic), 0.0);
    }

    #[test]
    fn point_source_bounds_are_checked() {
        let (dims, _) = setup(2, 2);
        assert!(make_point_source(dims, dims.volume(), 0, 0).is_err());
        assert!(make_point_source(dims, 0, 4, 0).is_err());
        assert!(make_point_source(dims, 0, 0, 3).is_err());
    }

    #[test]
    fn kappa_zero_converges_in_one_iteration_to_the_source() {
        let (dims, table) = setup(2, 2);
        let gauge = GaugeField::random(dims, 3);
        let eta = FermionField::random(dims, 4);
        let result = cg_normal(
            &gauge,
            &eta,
            0.0,
            &SolverParams::default(),
            &table,
            ExecMode::Deterministic,
        )
        .unwrap();
        assert!(result.converged);
        assert_eq!(result.iterations, 1);
        assert_eq!(result.residual_history.len(), 2);
        assert!(result.psi.max_abs_diff(&eta) <= 1e-14);
    }

    #[test]
    fn zero_source_returns_zero_solution() {
        let (dims, table) = setup(2, 2);
        let gauge = GaugeField::random(dims, 6);
        let eta = FermionField::zero(dims);
        let result = cg_normal(
            &gauge,
            &eta,
            0.1,
            &SolverParams::default(),
            &table,
            ExecMode::Deterministic,
        )
        .unwrap();
        assert!(result.converged);
        assert_eq!(result.iterations, 0);
        assert_eq!(result.residual_history, vec![0.0]);
        assert_eq!(norm_sq(&result.psi, ExecMode::Deterministic), 0.0);
    }

    #[test]
    fn max_iter_exhaustion_reports_unconverged() {
        let (dims, table) = setup(2, 4);
        let gauge = GaugeField::random(dims, 7);
        let eta = FermionField::random(dims, 8);
        let params = SolverParams { tol: 1e-12, max_iter: 1, ..Default::default() };
        let result = cg_normal(&gauge, &eta, 0.12, &params, &table, ExecMode::Deterministic).unwrap();
        assert!(!result.converged);
        assert_eq!(result.iterations, 1);
        // The best iterate is still returned with an honest residual.
        assert!(result.true_residual > 1e-12);
    }

    #[test]
    fn invalid_tolerance_is_rejected() {
        let (dims, table) = setup(2, 2);
        let gauge = GaugeField::unit(dims);
        let eta = FermionField::random(dims, 9);
        let params = SolverParams { tol: 0.0, ..Default::default() };
        assert!(matches!(
            cg_normal(&gauge, &eta, 0.1, &params, &table, ExecMode::Deterministic),
            Err(SolverError::InvalidParams { .. })
        ));
    }

    #[test]
    fn history_length_is_iterations_plus_one() {
        let (dims, table) = setup(2, 4);
        let gauge = GaugeField::random(dims, 10);
        let eta = FermionField::random(dims, 11);
        let params = SolverParams { tol: 1e-10, ..Default::default() };
        let result = cg_normal(&gauge, &eta, 0.1, &params, &table, ExecMode::Deterministic).unwrap();
        assert!(result.converged);
        assert_eq!(result.residual_history.len(), result.iterations + 1);
        assert!(result.true_residual <= 1e-10);
    }

    #[test]
    fn deterministic_and_parallel_agree_to_rounding() {
        let (dims, table) = setup(2, 4);
        let gauge = GaugeField::random(dims, 12);
        let eta = FermionField::random(dims, 13);
        let params = SolverParams { tol: 1e-10, ..Default::default() };
        let a = cg_normal(&gauge, &eta, 0.1, &params, &table, ExecMode::Deterministic).unwrap();
        let b = cg_normal(&gauge, &eta, 0.1, &params, &table, ExecMode::Parallel).unwrap();
        assert!(a.converged && b.converged);
        assert!(a.psi.max_abs_diff(&b.psi) <= 1e-9);
    }
}
