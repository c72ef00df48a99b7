//! Lattice geometry: site indexing, neighbor tables, and block splitting.
//!
//! The lattice is a 4-dimensional torus of extent `L` in the three spatial
//! directions (x, y, z) and `T` in time, with all extents even and at least
//! 2. Sites are numbered lexicographically with x running fastest:
//! `index = x + L*(y + L*(z + L*t))`.
//!
//! Directions are indexed `mu = 0..3` for (x, y, z, t); `mu = 3` is the time
//! axis. Boundary conditions are periodic; the fermion field may optionally
//! be antiperiodic in time, realized as a -1 sign on every link crossing the
//! time boundary (the sign is attached to the hop in the neighbor table and
//! applied to the gauge matrix at use time, in both hopping directions).

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("lattice extents must be even and at least 2, got L={l}, T={t}")]
    BadDims { l: usize, t: usize },
    #[error("coordinate {coords:?} out of range for L={l}, T={t}")]
    CoordOutOfRange { coords: [usize; 4], l: usize, t: usize },
    #[error("direction index must be 0..=3, got {axis}")]
    BadAxis { axis: usize },
}

/// Validated lattice extents, `V = L^3 * T`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeDims {
    l: usize,
    t: usize,
}

impl LatticeDims {
    pub fn new(l: usize, t: usize) -> Result<LatticeDims, GeometryError> {
        if l < 2 || t < 2 || l % 2 != 0 || t % 2 != 0 {
            return Err(GeometryError::BadDims { l, t });
        }
        Ok(LatticeDims { l, t })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn volume(&self) -> usize {
        self.l * self.l * self.l * self.t
    }

    /// Extent along direction `mu` (x, y, z share `L`; `mu = 3` is `T`).
    pub fn extent(&self, mu: usize) -> usize {
        if mu == 3 {
            self.t
        } else {
            self.l
        }
    }
}

/// Lexicographic site index, x fastest.
pub fn site_index(dims: LatticeDims, coords: [usize; 4]) -> Result<usize, GeometryError> {
    for mu in 0..4 {
        if coords[mu] >= dims.extent(mu) {
            return Err(GeometryError::CoordOutOfRange { coords, l: dims.l, t: dims.t });
        }
    }
    let [x, y, z, t] = coords;
    let l = dims.l;
    Ok(x + l * (y + l * (z + l * t)))
}

/// Inverse of [`site_index`].
pub fn site_coords(dims: LatticeDims, index: usize) -> [usize; 4] {
    debug_assert!(index < dims.volume());
    let l = dims.l;
    let x = index % l;
    let rest = index / l;
    let y = rest % l;
    let rest = rest / l;
    let z = rest % l;
    let t = rest / l;
    [x, y, z, t]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryCondition {
    /// Periodic in all four directions.
    Periodic,
    /// Periodic in space, antiperiodic in time: hops wrapping the time
    /// boundary pick up a factor of -1.
    AntiperiodicTime,
}

/// Precomputed neighbors and boundary signs for every (site, direction).
#[derive(Clone, Debug)]
pub struct NeighborTable {
    dims: LatticeDims,
    bc: BoundaryCondition,
    fwd: Vec<[usize; 4]>,
    bwd: Vec<[usize; 4]>,
    fwd_sign: Vec<[i8; 4]>,
    bwd_sign: Vec<[i8; 4]>,
}

impl NeighborTable {
    pub fn build(dims: LatticeDims, bc: BoundaryCondition) -> NeighborTable {
        let v = dims.volume();
        let mut fwd = vec![[0usize; 4]; v];
        let mut bwd = vec![[0usize; 4]; v];
        let mut fwd_sign = vec![[1i8; 4]; v];
        let mut bwd_sign = vec![[1i8; 4]; v];
        for n in 0..v {
            let coords = site_coords(dims, n);
            for mu in 0..4 {
                let ext = dims.extent(mu);
                let mut up = coords;
                let wraps_up = coords[mu] + 1 == ext;
                up[mu] = if wraps_up { 0 } else { coords[mu] + 1 };
                let mut down = coords;
                let wraps_down = coords[mu] == 0;
                down[mu] = if wraps_down { ext - 1 } else { coords[mu] - 1 };
                fwd[n][mu] = site_index(dims, up).expect("in-range by construction");
                bwd[n][mu] = site_index(dims, down).expect("in-range by construction");
                let flip = bc == BoundaryCondition::AntiperiodicTime && mu == 3;
                if flip && wraps_up {
                    fwd_sign[n][mu] = -1;
                }
                if flip && wraps_down {
                    bwd_sign[n][mu] = -1;
                }
            }
        }
        NeighborTable { dims, bc, fwd, bwd, fwd_sign, bwd_sign }
    }

    pub fn dims(&self) -> LatticeDims {
        self.dims
    }

    pub fn boundary_condition(&self) -> BoundaryCondition {
        self.bc
    }

    #[inline]
    pub fn fwd(&self, site: usize, mu: usize) -> usize {
        self.fwd[site][mu]
    }

    #[inline]
    pub fn bwd(&self, site: usize, mu: usize) -> usize {
        self.bwd[site][mu]
    }

    /// Sign picked up by the hop `site -> site + mu` (applied to the link).
    #[inline]
    pub fn fwd_sign(&self, site: usize, mu: usize) -> f64 {
        self.fwd_sign[site][mu] as f64
    }

    /// Sign picked up by the hop `site -> site - mu`.
    #[inline]
    pub fn bwd_sign(&self, site: usize, mu: usize) -> f64 {
        self.bwd_sign[site][mu] as f64
    }
}

/// A two-way split of the site set along one axis, with halos.
///
/// Block 0 holds the sites whose coordinate along `axis` lies in the lower
/// half, block 1 the rest. The halo of a block is every site of the *other*
/// block reachable by a single +-mu hop from inside the block: the data a
/// block needs beyond its own sites to apply one stencil sweep.
#[derive(Clone, Debug)]
pub struct BlockDecomposition {
    axis: usize,
    blocks: [Vec<usize>; 2],
    halos: [Vec<usize>; 2],
}

impl BlockDecomposition {
    pub fn axis(&self) -> usize {
        self.axis
    }

    pub fn block(&self, b: usize) -> &[usize] {
        &self.blocks[b]
    }

    pub fn halo(&self, b: usize) -> &[usize] {
        &self.halos[b]
    }
}

/// Split the lattice in two along `axis` (default choice in callers: the
/// time axis, which for `L^3 x T` lattices gives two `L^3 x T/2` slabs).
pub fn split_blocks(dims: LatticeDims, axis: usize) -> Result<BlockDecomposition, GeometryError> {
    if axis > 3 {
        return Err(GeometryError::BadAxis { axis });
    }
    let ext = dims.extent(axis);
    // Extents are even by construction, so the cut is always well-defined.
    let half = ext / 2;
    let v = dims.volume();

    let mut blocks: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    let mut which = vec![0u8; v];
    for n in 0..v {
        let b = usize::from(site_coords(dims, n)[axis] >= half);
        which[n] = b as u8;
        blocks[b].push(n);
    }

    // Halo of block b: neighbor sites of b that live in the other block.
    let table = NeighborTable::build(dims, BoundaryCondition::Periodic);
    let mut halos: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for b in 0..2 {
        let mut in_halo = vec![false; v];
        for &n in &blocks[b] {
            for mu in 0..4 {
                for nb in [table.fwd(n, mu), table.bwd(n, mu)] {
                    if which[nb] as usize != b {
                        in_halo[nb] = true;
                    }
                }
            }
        }
        halos[b] = (0..v).filter(|&n| in_halo[n]).collect();
    }

    Ok(BlockDecomposition { axis, blocks, halos })
}
