//! Dense materialization of the lattice operator, for desk-scale checking.
//!
//! The operator on a lattice of volume `V` acts on `12V` complex components
//! (4 spin x 3 color per site). [`build_dense`] materializes it column by
//! column by applying it to unit basis fields, producing a `12V x 12V`
//! complex matrix against which structural properties (hermiticity patterns,
//! sparsity, solves) can be verified by ordinary linear algebra. The
//! component flattening is site-major, then spin, then color:
//! `idx = (site*4 + spin)*3 + color`.

use crate::field::{FermionField, GaugeField};
use crate::lattice::{LatticeDims, NeighborTable};
use crate::su3::{Complex, C_ZERO};
use crate::ExecMode;
use thiserror::Error;

/// Largest volume the dense oracle accepts; beyond this the matrix is no
/// longer a desk-scale object (12V x 12V complex doubles).
pub const MAX_DENSE_VOLUME: usize = 256;

#[derive(Debug, Error, PartialEq)]
pub enum DenseError {
    #[error("volume {volume} exceeds the dense-oracle limit of {MAX_DENSE_VOLUME} sites")]
    TooLarge { volume: usize },
}

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<Complex>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> DenseMatrix {
        DenseMatrix { n, data: vec![C_ZERO; n * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, z: Complex) {
        self.data[i * self.n + j] = z;
    }

    pub fn adjoint(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out.set(i, j, self.get(j, i).conj());
            }
        }
        out
    }

    pub fn apply(&self, x: &[Complex]) -> Vec<Complex> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![C_ZERO; self.n];
        for i in 0..self.n {
            let mut acc = C_ZERO;
            for j in 0..self.n {
                acc += self.get(i, j) * x[j];
            }
            y[i] = acc;
        }
        y
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Number of complex components a field on `dims` flattens to.
pub fn flat_len(dims: LatticeDims) -> usize {
    12 * dims.volume()
}

/// Flatten a fermion field to the dense component ordering.
pub fn flatten_field(field: &FermionField) -> Vec<Complex> {
    let mut out = Vec::with_capacity(flat_len(field.dims()));
    for s in field.sites() {
        for spin in 0..4 {
            for color in 0..3 {
                out.push(s.0[spin].0[color]);
            }
        }
    }
    out
}

/// Inverse of [`flatten_field`].
pub fn unflatten_field(dims: LatticeDims, flat: &[Complex]) -> FermionField {
    assert_eq!(flat.len(), flat_len(dims));
    let mut field = FermionField::zero(dims);
    let mut k = 0;
    for n in 0..dims.volume() {
        let s = field.site_mut(n);
        for spin in 0..4 {
            for color in 0..3 {
                s.0[spin].0[color] = flat[k];
                k += 1;
            }
        }
    }
    field
}

/// Sign of the diagonal gamma5 on flattened component `idx` (+1 on the
/// upper two spin components, -1 on the lower two).
pub fn gamma5_sign(idx: usize) -> f64 {
    if (idx / 3) % 4 < 2 {
        1.0
    } else {
        -1.0
    }
}

/// Materialize any field-to-field linear map as a dense matrix by feeding
/// it unit basis fields.
pub fn build_dense_op<F>(dims: LatticeDims, op: F) -> Result<DenseMatrix, DenseError>
where
    F: Fn(&FermionField) -> FermionField,
{
    if dims.volume() > MAX_DENSE_VOLUME {
        return Err(DenseError::TooLarge { volume: dims.volume() });
    }
    let n = flat_len(dims);
    let mut m = DenseMatrix::zeros(n);
    let mut basis = vec![C_ZERO; n];
    for j in 0..n {
        basis[j] = Complex { re: 1.0, im: 0.0 };
        let col = flatten_field(&op(&unflatten_field(dims, &basis)));
        basis[j] = C_ZERO;
        for i in 0..n {
            m.set(i, j, col[i]);
        }
    }
    Ok(m)
}

/// Dense matrix of the Wilson-Dirac operator for the given gauge field.
pub fn build_dense(
    gauge: &GaugeField,
    table: &NeighborTable,
    kappa: f64,
) -> Result<DenseMatrix, DenseError> {
    build_dense_op(gauge.dims(), |psi| {
        crate::dirac::apply_d(gauge, psi, table, kappa, ExecMode::Deterministic)
    })
}

/// Convenience: the unit basis field with a single 1 in component
/// (site, spin, color).
pub fn basis_field(dims: LatticeDims, site: usize, spin: usize, color: usize) -> FermionField {
    let mut f = FermionField::zero(dims);
    f.site_mut(site).0[spin].0[color] = Complex { re: 1.0, im: 0.0 };
    f
}

/// A spinor-resolution view of which site blocks of a dense operator are
/// nonzero: entry (i, j) is true when the 12x12 block coupling site j into
/// site i holds any entry above `tol`.
pub fn site_block_mask(m: &DenseMatrix, dims: LatticeDims, tol: f64) -> Vec<Vec<bool>> {
    let v = dims.volume();
    let mut mask = vec![vec![false; v]; v];
    for i in 0..v {
        for j in 0..v {
            'block: for a in 0..12 {
                for b in 0..12 {
                    if m.get(i * 12 + a, j * 12 + b).norm() > tol {
                        mask[i][j] = true;
                        break 'block;
                    }
                }
            }
        }
    }
    mask
}
