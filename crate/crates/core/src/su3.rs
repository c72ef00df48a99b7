//! Complex 3-component color vectors and SU(3) color matrices.
//!
//! These are the basic data types of the lattice operator: a gauge link is
//! an SU(3) matrix attached to a lattice bond, and each spin component of a
//! fermion carries a 3-component complex color vector. Everything is double
//! precision, stored as interleaved (re, im) pairs, and the arithmetic is
//! written with a fixed association order so results are reproducible
//! bit-for-bit on any platform.
//!
//! A unitary 3x3 matrix is fully determined by its first two rows: the third
//! is the complex conjugate of their cross product. [`compress`] /
//! [`reconstruct_third_row`] implement that two-row storage scheme, which
//! cuts a stored link from 18 to 12 reals.

use crate::rng::Counter64;
use thiserror::Error;

pub type Complex = num_complex::Complex<f64>;

/// Shorthand constructor usable in `const` items.
#[inline]
pub const fn c(re: f64, im: f64) -> Complex {
    Complex { re, im }
}

pub const C_ZERO: Complex = c(0.0, 0.0);
pub const C_ONE: Complex = c(1.0, 0.0);

/// Tolerance for algebraic identities built out of several operations
/// (unitarity of a constructed matrix, determinant, projector algebra).
pub const TOL_ALGEBRAIC: f64 = 1e-12;
/// Tolerance for single-operation round trips (multiply then undo).
pub const TOL_ROUNDTRIP: f64 = 1e-13;
/// Tolerance when accepting data from external sources (files, user input).
pub const TOL_INPUT: f64 = 1e-10;

/// Exact real-operation cost of one complex multiply: 4 multiplies...
pub const CMUL_MULS: u64 = 4;
/// ...and 2 additions, `(ac - bd, ad + bc)`.
pub const CMUL_ADDS: u64 = 2;
/// One complex addition costs 2 real additions.
pub const CADD_ADDS: u64 = 2;

/// Real multiplies in one 3x3 matrix-vector product: 9 complex multiplies.
pub const MAT_VEC_MULS: u64 = 9 * CMUL_MULS;
/// Real additions in one matrix-vector product: the multiplies contribute
/// 9*2 and summing three products per row contributes 3 rows * 2 complex
/// additions = 6*2.
pub const MAT_VEC_ADDS: u64 = 9 * CMUL_ADDS + 6 * CADD_ADDS;
/// Adding two color vectors: 3 complex additions.
pub const VEC_ADD_ADDS: u64 = 3 * CADD_ADDS;
/// Scaling a color vector by a real: 6 real multiplies.
pub const VEC_SCALE_MULS: u64 = 6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ColorVector(pub [Complex; 3]);

impl ColorVector {
    pub const ZERO: ColorVector = ColorVector([C_ZERO; 3]);

    #[inline]
    pub fn add(&self, other: &ColorVector) -> ColorVector {
        ColorVector([
            self.0[0] + other.0[0],
            self.0[1] + other.0[1],
            self.0[2] + other.0[2],
        ])
    }

    #[inline]
    pub fn sub(&self, other: &ColorVector) -> ColorVector {
        ColorVector([
            self.0[0] - other.0[0],
            self.0[1] - other.0[1],
            self.0[2] - other.0[2],
        ])
    }

    /// Multiply by a real scalar (6 real multiplies).
    #[inline]
    pub fn scale(&self, a: f64) -> ColorVector {
        ColorVector([self.0[0] * a, self.0[1] * a, self.0[2] * a])
    }

    #[inline]
    pub fn scale_complex(&self, a: Complex) -> ColorVector {
        ColorVector([self.0[0] * a, self.0[1] * a, self.0[2] * a])
    }

    /// Sign flip; pure routing, counted as zero floating-point work.
    #[inline]
    pub fn neg(&self) -> ColorVector {
        ColorVector([-self.0[0], -self.0[1], -self.0[2]])
    }

    /// Hermitian inner product `sum_i conj(self_i) * other_i`.
    pub fn dot(&self, other: &ColorVector) -> Complex {
        let mut acc = C_ZERO;
        for i in 0..3 {
            acc += self.0[i].conj() * other.0[i];
        }
        acc
    }

    pub fn norm_sq(&self) -> f64 {
        self.0[0].norm_sqr() + self.0[1].norm_sqr() + self.0[2].norm_sqr()
    }

    pub fn max_abs_diff(&self, other: &ColorVector) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..3 {
            m = m.max((self.0[i] - other.0[i]).norm());
        }
        m
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ColorMatrix(pub [[Complex; 3]; 3]);

impl ColorMatrix {
    pub const IDENTITY: ColorMatrix = ColorMatrix([
        [C_ONE, C_ZERO, C_ZERO],
        [C_ZERO, C_ONE, C_ZERO],
        [C_ZERO, C_ZERO, C_ONE],
    ]);

    pub const ZERO: ColorMatrix = ColorMatrix([[C_ZERO; 3]; 3]);

    pub fn adjoint(&self) -> ColorMatrix {
        let mut out = ColorMatrix::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = self.0[j][i].conj();
            }
        }
        out
    }

    /// Sign flip on every entry (used to impose boundary-condition signs on
    /// links); routing only, no counted flops.
    pub fn negated(&self) -> ColorMatrix {
        let mut out = *self;
        for row in out.0.iter_mut() {
            for z in row.iter_mut() {
                *z = -*z;
            }
        }
        out
    }

    pub fn mul(&self, other: &ColorMatrix) -> ColorMatrix {
        let mut out = ColorMatrix::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = self.0[i][0] * other.0[0][j];
                acc += self.0[i][1] * other.0[1][j];
                acc += self.0[i][2] * other.0[2][j];
                out.0[i][j] = acc;
            }
        }
        out
    }

    /// Determinant by cofactor expansion along the first row.
    pub fn det(&self) -> Complex {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Largest entry-wise deviation of `U^dag U` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let p = self.adjoint().mul(self);
        let mut dev: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { C_ONE } else { C_ZERO };
                dev = dev.max((p.0[i][j] - target).norm());
            }
        }
        dev
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    pub fn max_abs_diff(&self, other: &ColorMatrix) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                m = m.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        m
    }
}

/// `U * x` with fixed association `(u_i0 x_0 + u_i1 x_1) + u_i2 x_2`.
///
/// Costs [`MAT_VEC_MULS`] real multiplies and [`MAT_VEC_ADDS`] real adds.
#[inline]
pub fn mat_vec(u: &ColorMatrix, x: &ColorVector) -> ColorVector {
    let m = &u.0;
    let v = &x.0;
    ColorVector([
        (m[0][0] * v[0] + m[0][1] * v[1]) + m[0][2] * v[2],
        (m[1][0] * v[0] + m[1][1] * v[1]) + m[1][2] * v[2],
        (m[2][0] * v[0] + m[2][1] * v[1]) + m[2][2] * v[2],
    ])
}

/// `U^dag * x` without forming the adjoint: row i of `U^dag` is the
/// conjugated column i of `U`. Same cost and association order as
/// [`mat_vec`].
#[inline]
pub fn adj_mat_vec(u: &ColorMatrix, x: &ColorVector) -> ColorVector {
    let m = &u.0;
    let v = &x.0;
    ColorVector([
        (m[0][0].conj() * v[0] + m[1][0].conj() * v[1]) + m[2][0].conj() * v[2],
        (m[0][1].conj() * v[0] + m[1][1].conj() * v[1]) + m[2][1].conj() * v[2],
        (m[0][2].conj() * v[0] + m[1][2].conj() * v[1]) + m[2][2].conj() * v[2],
    ])
}

/// First two rows of a unitary matrix; the third row is redundant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompressedColorMatrix(pub [[Complex; 3]; 2]);

/// Keep the first two rows of `u`. Meaningful only when the rows are
/// orthonormal (any unitary matrix qualifies).
pub fn compress(u: &ColorMatrix) -> CompressedColorMatrix {
    CompressedColorMatrix([u.0[0], u.0[1]])
}

#[derive(Debug, Error, PartialEq)]
pub enum Su3Error {
    /// The stored rows are (numerically) parallel, so no third row can be
    /// recovered. Cannot happen for data that was ever a unitary matrix.
    #[error("compressed rows are degenerate (|row0 x row1| = {cross_norm:.3e})")]
    DegenerateRows { cross_norm: f64 },
}

/// Formal (unconjugated) cross product of two complex 3-vectors.
fn cross(a: &ColorVector, b: &ColorVector) -> ColorVector {
    ColorVector([
        a.0[1] * b.0[2] - a.0[2] * b.0[1],
        a.0[2] * b.0[0] - a.0[0] * b.0[2],
        a.0[0] * b.0[1] - a.0[1] * b.0[0],
    ])
}

/// Rebuild the full matrix from two stored rows:
/// `row2 = conj(row0 x row1)`. For orthonormal inputs the result is the
/// unique special-unitary completion (det = +1).
pub fn reconstruct_third_row(cm: &CompressedColorMatrix) -> Result<ColorMatrix, Su3Error> {
    let r0 = ColorVector(cm.0[0]);
    let r1 = ColorVector(cm.0[1]);
    let cr = cross(&r0, &r1);
    let cross_norm = cr.norm_sq().sqrt();
    if cross_norm < TOL_INPUT {
        return Err(Su3Error::DegenerateRows { cross_norm });
    }
    let row2 = [cr.0[0].conj(), cr.0[1].conj(), cr.0[2].conj()];
    Ok(ColorMatrix([cm.0[0], cm.0[1], row2]))
}

/// Draw a random SU(3) matrix from the documented counter stream for `seed`:
/// two rows of entries uniform in `[-1, 1)`, Gram-Schmidt orthonormalized,
/// third row completed as `conj(row0 x row1)`. Degenerate draws (norm or
/// cross product below 1e-4) are discarded and redrawn from the same stream,
/// so the procedure is total and still deterministic.
pub fn random_su3(seed: u64) -> ColorMatrix {
    let mut rng = Counter64::new(seed);
    random_su3_from(&mut rng)
}

/// Same as [`random_su3`] but drawing from an existing stream.
pub fn random_su3_from(rng: &mut Counter64) -> ColorMatrix {
    const MIN_NORM_SQ: f64 = 1e-8;
    loop {
        let mut r0 = draw_vector(rng);
        let n0 = r0.norm_sq();
        if n0 < MIN_NORM_SQ {
            continue;
        }
        r0 = r0.scale(1.0 / n0.sqrt());

        let mut r1 = draw_vector(rng);
        // Project out the r0 component, then normalize.
        let overlap = r0.dot(&r1);
        r1 = r1.sub(&r0.scale_complex(overlap));
        let n1 = r1.norm_sq();
        if n1 < MIN_NORM_SQ {
            continue;
        }
        r1 = r1.scale(1.0 / n1.sqrt());

        let cm = CompressedColorMatrix([r0.0, r1.0]);
        match reconstruct_third_row(&cm) {
            Ok(u) => return u,
            Err(_) => continue,
        }
    }
}

fn draw_vector(rng: &mut Counter64) -> ColorVector {
    let mut v = ColorVector::ZERO;
    for z in v.0.iter_mut() {
        let re = rng.next_symmetric();
        let im = rng.next_symmetric();
        *z = c(re, im);
    }
    v
}
