//! Four-component spinors, the gamma-matrix basis, and spin projection.
//!
//! A spinor carries one [`ColorVector`] per spin component. The gamma
//! matrices used here are the chiral set with `gamma5 = diag(1, 1, -1, -1)`;
//! every entry is 0, +-1 or +-i, so multiplying by a gamma matrix is pure
//! data routing with no floating-point cost.
//!
//! The hopping terms of the Wilson operator only ever see spinors through
//! the unnormalized projectors `P(mu, s) = 1 + s*gamma_mu` (`s = +-1`).
//! `P` has rank 2: its lower two rows are unit-phase multiples of the upper
//! two. [`project`] therefore keeps only the two independent components (a
//! [`HalfSpinor`]) and [`reconstruct`] restores the full spinor afterwards,
//! halving the matrix-vector work in the stencil. The routing tables that
//! make this work are not hand-derived: they are computed at first use from
//! the dense gamma matrices and cross-checked against them, so a transcription
//! error in either representation cannot survive startup.

use crate::su3::{c, ColorVector, Complex, C_ONE, C_ZERO, VEC_ADD_ADDS};
use std::sync::OnceLock;
use thiserror::Error;

/// One color vector per spin index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spinor(pub [ColorVector; 4]);

/// The two independent spin components surviving a projection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfSpinor(pub [ColorVector; 2]);

impl Spinor {
    pub const ZERO: Spinor = Spinor([ColorVector::ZERO; 4]);

    pub fn add(&self, other: &Spinor) -> Spinor {
        Spinor([
            self.0[0].add(&other.0[0]),
            self.0[1].add(&other.0[1]),
            self.0[2].add(&other.0[2]),
            self.0[3].add(&other.0[3]),
        ])
    }

    pub fn sub(&self, other: &Spinor) -> Spinor {
        Spinor([
            self.0[0].sub(&other.0[0]),
            self.0[1].sub(&other.0[1]),
            self.0[2].sub(&other.0[2]),
            self.0[3].sub(&other.0[3]),
        ])
    }

    pub fn scale(&self, a: f64) -> Spinor {
        Spinor([
            self.0[0].scale(a),
            self.0[1].scale(a),
            self.0[2].scale(a),
            self.0[3].scale(a),
        ])
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|v| v.norm_sq()).sum()
    }

    pub fn max_abs_diff(&self, other: &Spinor) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    /// `gamma5 * psi`: flip the sign of the lower two spin components.
    /// Routing only, no floating-point work.
    pub fn gamma5(&self) -> Spinor {
        Spinor([self.0[0], self.0[1], self.0[2].neg(), self.0[3].neg()])
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SpinorError {
    #[error("no gamma matrix with index {idx}; valid indices are 0, 1, 2, 3, 5")]
    InvalidGammaIndex { idx: usize },
}

/// Names for the five gamma matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gamma {
    G0,
    G1,
    G2,
    G3,
    G5,
}

impl Gamma {
    pub fn from_index(idx: usize) -> Result<Gamma, SpinorError> {
        match idx {
            0 => Ok(Gamma::G0),
            1 => Ok(Gamma::G1),
            2 => Ok(Gamma::G2),
            3 => Ok(Gamma::G3),
            5 => Ok(Gamma::G5),
            _ => Err(SpinorError::InvalidGammaIndex { idx }),
        }
    }

    /// Dense 4x4 matrix, exact entries.
    pub fn matrix(self) -> &'static [[Complex; 4]; 4] {
        match self {
            Gamma::G0 => &GAMMA0,
            Gamma::G1 => &GAMMA1,
            Gamma::G2 => &GAMMA2,
            Gamma::G3 => &GAMMA3,
            Gamma::G5 => &GAMMA5,
        }
    }
}

const I: Complex = c(0.0, 1.0);
const NI: Complex = c(0.0, -1.0);
const ONE: Complex = C_ONE;
const NONE: Complex = c(-1.0, 0.0);
const O: Complex = C_ZERO;

pub static GAMMA0: [[Complex; 4]; 4] = [
    [O, O, O, I],
    [O, O, I, O],
    [O, NI, O, O],
    [NI, O, O, O],
];

pub static GAMMA1: [[Complex; 4]; 4] = [
    [O, O, O, NONE],
    [O, O, ONE, O],
    [O, ONE, O, O],
    [NONE, O, O, O],
];

pub static GAMMA2: [[Complex; 4]; 4] = [
    [O, O, I, O],
    [O, O, O, NI],
    [NI, O, O, O],
    [O, I, O, O],
];

pub static GAMMA3: [[Complex; 4]; 4] = [
    [O, O, ONE, O],
    [O, O, O, ONE],
    [ONE, O, O, O],
    [O, ONE, O, O],
];

pub static GAMMA5: [[Complex; 4]; 4] = [
    [ONE, O, O, O],
    [O, ONE, O, O],
    [O, O, NONE, O],
    [O, O, O, NONE],
];

/// Apply a gamma matrix to the spin index: `out_a = sum_b g[a][b] psi_b`.
/// Exact-zero entries are skipped, so only the genuinely routed components
/// participate.
pub fn gamma_mul(g: Gamma, psi: &Spinor) -> Spinor {
    let m = g.matrix();
    let mut out = Spinor::ZERO;
    for a in 0..4 {
        let mut acc = ColorVector::ZERO;
        for b in 0..4 {
            let coeff = m[a][b];
            if coeff.re == 0.0 && coeff.im == 0.0 {
                continue;
            }
            acc = acc.add(&psi.0[b].scale_complex(coeff));
        }
        out.0[a] = acc;
    }
    out
}

/// Sign of the projector `1 + s*gamma_mu`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// A unit phase `{1, -1, i, -i}`: multiplication is re/im routing with no
/// floating-point cost.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnitPhase {
    One,
    MinusOne,
    PosI,
    NegI,
}

impl UnitPhase {
    fn from_complex(z: Complex) -> Option<UnitPhase> {
        match (z.re, z.im) {
            (re, im) if re == 1.0 && im == 0.0 => Some(UnitPhase::One),
            (re, im) if re == -1.0 && im == 0.0 => Some(UnitPhase::MinusOne),
            (re, im) if re == 0.0 && im == 1.0 => Some(UnitPhase::PosI),
            (re, im) if re == 0.0 && im == -1.0 => Some(UnitPhase::NegI),
            _ => None,
        }
    }

    pub fn to_complex(self) -> Complex {
        match self {
            UnitPhase::One => ONE,
            UnitPhase::MinusOne => NONE,
            UnitPhase::PosI => I,
            UnitPhase::NegI => NI,
        }
    }

    /// Apply the phase to one complex number by routing.
    #[inline]
    fn apply(self, z: Complex) -> Complex {
        match self {
            UnitPhase::One => z,
            UnitPhase::MinusOne => -z,
            UnitPhase::PosI => c(-z.im, z.re),
            UnitPhase::NegI => c(z.im, -z.re),
        }
    }

    /// Apply the phase to a whole color vector.
    #[inline]
    pub fn apply_vector(self, v: &ColorVector) -> ColorVector {
        ColorVector([self.apply(v.0[0]), self.apply(v.0[1]), self.apply(v.0[2])])
    }
}

/// How to compute the two kept components of `(1 + s*gamma_mu) psi`:
/// `h_i = psi_i + phase_i * psi_partner_i` for i = 0, 1.
#[derive(Clone, Copy, Debug)]
struct ProjectRule {
    partner: [usize; 2],
    phase: [UnitPhase; 2],
}

/// How to restore the lower components from a half spinor:
/// `psi_(2+r) = phase_r * h_src_r` for r = 0, 1.
#[derive(Clone, Copy, Debug)]
struct ReconstructRule {
    src: [usize; 2],
    phase: [UnitPhase; 2],
}

struct Rules {
    project: [[ProjectRule; 2]; 4],     // [mu][sign]
    reconstruct: [[ReconstructRule; 2]; 4],
}

fn sign_slot(sign: Sign) -> usize {
    match sign {
        Sign::Plus => 0,
        Sign::Minus => 1,
    }
}

/// Dense `1 + s*gamma_mu`, built entry-by-entry from the gamma matrices.
pub fn projector_matrix(mu: usize, sign: Sign) -> [[Complex; 4]; 4] {
    assert!(mu < 4, "projector direction must be 0..=3, got {mu}");
    let g = Gamma::from_index(mu).expect("mu < 4 is always a valid gamma index").matrix();
    let s = sign.factor();
    let mut p = [[O; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            let diag = if a == b { ONE } else { O };
            p[a][b] = diag + g[a][b].scale(s);
        }
    }
    p
}

/// Derive the routing rules for one (mu, sign) from the dense projector and
/// verify them against it. Panics only if the gamma matrices lose their
/// defining structure, which would be a build-breaking transcription error.
fn derive_rules(mu: usize, sign: Sign) -> (ProjectRule, ReconstructRule) {
    let p = projector_matrix(mu, sign);

    // Upper rows: expect P[i][i] = 1 and exactly one other nonzero entry, a
    // unit phase sitting in the lower half (columns 2, 3).
    let mut partner = [0usize; 2];
    let mut phase = [UnitPhase::One; 2];
    for i in 0..2 {
        assert_eq!(p[i][i], ONE, "projector (mu={mu}) upper row lost its diagonal 1");
        let mut found = None;
        for b in 0..4 {
            if b == i {
                continue;
            }
            let z = p[i][b];
            if z.re == 0.0 && z.im == 0.0 {
                continue;
            }
            assert!(found.is_none(), "projector (mu={mu}) row {i} has more than one coupling");
            assert!(b >= 2, "projector (mu={mu}) row {i} couples inside the upper half");
            let up = UnitPhase::from_complex(z)
                .unwrap_or_else(|| panic!("projector (mu={mu}) entry {z} is not a unit phase"));
            found = Some((b, up));
        }
        let (b, up) = found.expect("projector upper row must couple to one lower component");
        partner[i] = b;
        phase[i] = up;
    }
    let proj = ProjectRule { partner, phase };

    // Lower rows: each must be a unit-phase multiple of one upper row.
    let mut src = [0usize; 2];
    let mut rphase = [UnitPhase::One; 2];
    for r in 0..2 {
        let row = 2 + r;
        let mut matched = None;
        for s in 0..2 {
            // Find a column where the candidate source row is nonzero.
            let k = (0..4)
                .find(|&k| !(p[s][k].re == 0.0 && p[s][k].im == 0.0))
                .expect("projector rows are nonzero");
            let ratio = p[row][k] / p[s][k];
            if let Some(up) = UnitPhase::from_complex(ratio) {
                // Exact proportionality across the whole row.
                let proportional = (0..4).all(|b| p[row][b] == p[s][b] * up.to_complex());
                if proportional {
                    matched = Some((s, up));
                    break;
                }
            }
        }
        let (s, up) = matched.unwrap_or_else(|| {
            panic!("projector (mu={mu}) lower row {row} is not a phase multiple of an upper row")
        });
        src[r] = s;
        rphase[r] = up;
    }
    let recon = ReconstructRule { src, phase: rphase };
    (proj, recon)
}

fn rules() -> &'static Rules {
    static RULES: OnceLock<Rules> = OnceLock::new();
    RULES.get_or_init(|| {
        let mut project = [[ProjectRule { partner: [0; 2], phase: [UnitPhase::One; 2] }; 2]; 4];
        let mut reconstruct =
            [[ReconstructRule { src: [0; 2], phase: [UnitPhase::One; 2] }; 2]; 4];
        for mu in 0..4 {
            for sign in [Sign::Plus, Sign::Minus] {
                let (p, r) = derive_rules(mu, sign);
                project[mu][sign_slot(sign)] = p;
                reconstruct[mu][sign_slot(sign)] = r;
            }
        }
        Rules { project, reconstruct }
    })
}

/// Upper two components of `(1 + s*gamma_mu) psi`.
///
/// Cost: exactly two color-vector additions (2 * [`VEC_ADD_ADDS`] real adds);
/// the phase rotations are free routing.
pub fn project(mu: usize, sign: Sign, psi: &Spinor) -> HalfSpinor {
    assert!(mu < 4, "projection direction must be 0..=3, got {mu}");
    let rule = &rules().project[mu][sign_slot(sign)];
    let h0 = psi.0[0].add(&rule.phase[0].apply_vector(&psi.0[rule.partner[0]]));
    let h1 = psi.0[1].add(&rule.phase[1].apply_vector(&psi.0[rule.partner[1]]));
    HalfSpinor([h0, h1])
}

/// Real additions performed by one [`project`] call.
pub const PROJECT_ADDS: u64 = 2 * VEC_ADD_ADDS;

/// Rebuild the full `(1 + s*gamma_mu)`-image spinor from its two kept
/// components. Pure routing: zero floating-point cost.
pub fn reconstruct(mu: usize, sign: Sign, h: &HalfSpinor) -> Spinor {
    assert!(mu < 4, "reconstruction direction must be 0..=3, got {mu}");
    let rule = &rules().reconstruct[mu][sign_slot(sign)];
    Spinor([
        h.0[0],
        h.0[1],
        rule.phase[0].apply_vector(&h.0[rule.src[0]]),
        rule.phase[1].apply_vector(&h.0[rule.src[1]]),
    ])
}

/// Apply the dense projector to all four spin components. Reference path
/// for the half-spinor shortcut; used by the unprojected stencil and tests.
pub fn project_dense(mu: usize, sign: Sign, psi: &Spinor) -> Spinor {
    let p = projector_matrix(mu, sign);
    let mut out = Spinor::ZERO;
    for a in 0..4 {
        let mut acc = ColorVector::ZERO;
        for b in 0..4 {
            let coeff = p[a][b];
            if coeff.re == 0.0 && coeff.im == 0.0 {
                continue;
            }
            acc = acc.add(&psi.0[b].scale_complex(coeff));
        }
        out.0[a] = acc;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Counter64;
    use crate::su3::c;

    fn random_spinor(seed: u64) -> Spinor {
        let mut rng = Counter64::new(seed);
        let mut s = Spinor::ZERO;
        for v in s.0.iter_mut() {
            for z in v.0.iter_mut() {
                *z = c(rng.next_symmetric(), rng.next_symmetric());
            }
        }
        s
    }

    /// Spinor with small-integer entries; products and cancellations with
    /// gamma entries are then exact in floating point.
    fn integer_spinor(seed: u64) -> Spinor {
        let mut rng = Counter64::new(seed);
        let mut s = Spinor::ZERO;
        for v in s.0.iter_mut() {
            for z in v.0.iter_mut() {
                let re = (rng.next_u64() % 17) as f64 - 8.0;
                let im = (rng.next_u64() % 17) as f64 - 8.0;
                *z = c(re, im);
            }
        }
        s
    }

    fn assert_spinor_eq_exact(a: &Spinor, b: &Spinor) {
        for sp in 0..4 {
            for col in 0..3 {
                assert_eq!(a.0[sp].0[col], b.0[sp].0[col], "spin {sp} color {col}");
            }
        }
    }

    #[test]
    fn gamma5_flips_lower_components() {
        let psi = random_spinor(5);
        let g = gamma_mul(Gamma::G5, &psi);
        assert_eq!(g.0[0], psi.0[0]);
        assert_eq!(g.0[1], psi.0[1]);
        assert_eq!(g.0[2], psi.0[2].neg());
        assert_eq!(g.0[3], psi.0[3].neg());
        // The routed shortcut agrees with the dense multiply.
        assert_spinor_eq_exact(&psi.gamma5(), &g);
    }

    #[test]
    fn gamma0_routes_components_with_i_phases() {
        // gamma0 (a, b, c, d) = (i d, i c, -i b, -i a)
        let psi = random_spinor(6);
        let g = gamma_mul(Gamma::G0, &psi);
        let i = UnitPhase::PosI;
        let ni = UnitPhase::NegI;
        assert_eq!(g.0[0], i.apply_vector(&psi.0[3]));
        assert_eq!(g.0[1], i.apply_vector(&psi.0[2]));
        assert_eq!(g.0[2], ni.apply_vector(&psi.0[1]));
        assert_eq!(g.0[3], ni.apply_vector(&psi.0[0]));
    }

    #[test]
    fn gamma_squared_is_identity_for_all_indices() {
        for idx in [0usize, 1, 2, 3, 5] {
            let g = Gamma::from_index(idx).unwrap();
            for seed in 0..10u64 {
                let psi = random_spinor(seed);
                let twice = gamma_mul(g, &gamma_mul(g, &psi));
                assert_spinor_eq_exact(&twice, &psi);
            }
        }
    }

    #[test]
    fn gammas_are_hermitian() {
        for idx in [0usize, 1, 2, 3, 5] {
            let m = Gamma::from_index(idx).unwrap().matrix();
            for a in 0..4 {
                for b in 0..4 {
                    assert_eq!(m[a][b], m[b][a].conj(), "gamma{idx}[{a}][{b}]");
                }
            }
        }
    }

    #[test]
    fn distinct_gammas_anticommute_exactly() {
        for mu in 0..4usize {
            for nu in 0..4usize {
                if mu == nu {
                    continue;
                }
                let gm = Gamma::from_index(mu).unwrap();
                let gn = Gamma::from_index(nu).unwrap();
                for seed in 0..5u64 {
                    let psi = integer_spinor(seed);
                    let ab = gamma_mul(gm, &gamma_mul(gn, &psi));
                    let ba = gamma_mul(gn, &gamma_mul(gm, &psi));
                    let sum = ab.add(&ba);
                    assert_eq!(sum.norm_sq(), 0.0, "mu={mu} nu={nu} seed={seed}");
                }
            }
        }
    }

    #[test]
    fn gamma5_anticommutes_with_each_gamma() {
        for mu in 0..4usize {
            let g = Gamma::from_index(mu).unwrap();
            for seed in 0..5u64 {
                let psi = integer_spinor(seed + 100);
                let a = gamma_mul(Gamma::G5, &gamma_mul(g, &psi));
                let b = gamma_mul(g, &gamma_mul(Gamma::G5, &psi));
                assert_eq!(a.add(&b).norm_sq(), 0.0, "mu={mu} seed={seed}");
            }
        }
    }

    #[test]
    fn invalid_gamma_index_is_rejected() {
        assert_eq!(
            Gamma::from_index(4),
            Err(SpinorError::InvalidGammaIndex { idx: 4 })
        );
        assert!(Gamma::from_index(6).is_err());
    }

    #[test]
    fn project_direction3_plus_adds_component_pairs() {
        // 1 + gamma3 keeps (psi0 + psi2, psi1 + psi3).
        let psi = random_spinor(7);
        let h = project(3, Sign::Plus, &psi);
        assert_eq!(h.0[0], psi.0[0].add(&psi.0[2]));
        assert_eq!(h.0[1], psi.0[1].add(&psi.0[3]));
        // ...and reconstruction duplicates them: (a, b, a, b).
        let full = reconstruct(3, Sign::Plus, &h);
        assert_eq!(full.0[2], h.0[0]);
        assert_eq!(full.0[3], h.0[1]);
    }

    #[test]
    fn project_of_zero_is_zero() {
        for mu in 0..4 {
            for sign in [Sign::Plus, Sign::Minus] {
                assert_eq!(project(mu, sign, &Spinor::ZERO), HalfSpinor([ColorVector::ZERO; 2]));
            }
        }
    }

    #[test]
    fn projected_reconstruction_matches_dense_projector() {
        for mu in 0..4usize {
            for sign in [Sign::Plus, Sign::Minus] {
                for seed in 0..20u64 {
                    let psi = random_spinor(seed * 31 + mu as u64);
                    let fast = reconstruct(mu, sign, &project(mu, sign, &psi));
                    let dense = project_dense(mu, sign, &psi);
                    assert!(
                        fast.max_abs_diff(&dense) <= 1e-15,
                        "mu={mu} sign={sign:?} seed={seed}: {}",
                        fast.max_abs_diff(&dense)
                    );
                }
            }
        }
    }

    #[test]
    fn projectors_sum_to_twice_identity() {
        // (1 + gamma) + (1 - gamma) = 2.
        for mu in 0..4usize {
            for seed in 0..10u64 {
                let psi = random_spinor(seed);
                let plus = reconstruct(mu, Sign::Plus, &project(mu, Sign::Plus, &psi));
                let minus = reconstruct(mu, Sign::Minus, &project(mu, Sign::Minus, &psi));
                let sum = plus.add(&minus);
                assert!(sum.max_abs_diff(&psi.scale(2.0)) <= 1e-15, "mu={mu} seed={seed}");
            }
        }
    }

    #[test]
    fn projector_squared_is_twice_itself() {
        // P^2 = 2P for P = 1 +- gamma.
        for mu in 0..4usize {
            for sign in [Sign::Plus, Sign::Minus] {
                for seed in 0..10u64 {
                    let psi = random_spinor(seed + 50);
                    let once = reconstruct(mu, sign, &project(mu, sign, &psi));
                    let twice = reconstruct(mu, sign, &project(mu, sign, &once));
                    assert!(
                        twice.max_abs_diff(&once.scale(2.0)) <= 1e-15,
                        "mu={mu} sign={sign:?} seed={seed}"
                    );
                }
            }
        }
    }

    #[test]
    fn opposite_projectors_annihilate() {
        // (1 - gamma)(1 + gamma) = 0.
        for mu in 0..4usize {
            for seed in 0..10u64 {
                let psi = random_spinor(seed + 80);
                let plus = reconstruct(mu, Sign::Plus, &project(mu, Sign::Plus, &psi));
                let both = reconstruct(mu, Sign::Minus, &project(mu, Sign::Minus, &plus));
                assert!(both.norm_sq() <= 1e-30, "mu={mu} seed={seed}: {}", both.norm_sq());
            }
        }
    }

    #[test]
    fn projection_commutes_with_color_rotation() {
        // Projection acts on spin only, so a color matrix applied per spin
        // component passes through it.
        use crate::su3::{mat_vec, random_su3};
        for mu in 0..4usize {
            for sign in [Sign::Plus, Sign::Minus] {
                let u = random_su3(mu as u64 * 7 + 1);
                let psi = random_spinor(900 + mu as u64);
                let rotated = Spinor([
                    mat_vec(&u, &psi.0[0]),
                    mat_vec(&u, &psi.0[1]),
                    mat_vec(&u, &psi.0[2]),
                    mat_vec(&u, &psi.0[3]),
                ]);
                let a = project(mu, sign, &rotated);
                let hb = project(mu, sign, &psi);
                let b = HalfSpinor([mat_vec(&u, &hb.0[0]), mat_vec(&u, &hb.0[1])]);
                let diff = a.0[0].max_abs_diff(&b.0[0]).max(a.0[1].max_abs_diff(&b.0[1]));
                assert!(diff <= 1e-13, "mu={mu} sign={sign:?}: {diff}");
            }
        }
    }

    #[test]
    fn derived_rules_cover_all_directions() {
        // Force the OnceLock derivation and its internal consistency checks.
        for mu in 0..4 {
            for sign in [Sign::Plus, Sign::Minus] {
                let psi = random_spinor(mu as u64 + 200);
                let _ = reconstruct(mu, sign, &project(mu, sign, &psi));
            }
        }
    }
}
