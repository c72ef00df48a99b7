//! Gauge and fermion field storage.
//!
//! A gauge field holds one SU(3) link per (site, direction), indexed
//! `site * 4 + mu`; a fermion field holds one spinor per site. Random
//! fields draw every link (or site) from its own derived counter stream —
//! `Counter64::derived(seed, 4*site + mu)` for links, `derived(seed, site)`
//! for spinors — so the content is a pure function of the seed and the
//! documented generator, independent of traversal order.

use crate::lattice::LatticeDims;
use crate::rng::Counter64;
use crate::spinor::Spinor;
use crate::su3::{c, random_su3_from, ColorMatrix, Su3Error, TOL_INPUT};
use crate::su3::{compress, reconstruct_third_row};

#[derive(Clone, Debug, PartialEq)]
pub struct GaugeField {
    dims: LatticeDims,
    links: Vec<ColorMatrix>,
}

/// One link that failed the unitarity check on load.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitarityViolation {
    pub site: usize,
    pub mu: usize,
    pub deviation: f64,
}

impl GaugeField {
    /// Free field: every link is the identity.
    pub fn unit(dims: LatticeDims) -> GaugeField {
        GaugeField { dims, links: vec![ColorMatrix::IDENTITY; dims.volume() * 4] }
    }

    /// Every link an independent random SU(3) matrix from the stream
    /// `derived(seed, 4*site + mu)`.
    pub fn random(dims: LatticeDims, seed: u64) -> GaugeField {
        let v = dims.volume();
        let mut links = Vec::with_capacity(v * 4);
        for site in 0..v {
            for mu in 0..4 {
                let mut rng = Counter64::derived(seed, (site * 4 + mu) as u64);
                links.push(random_su3_from(&mut rng));
            }
        }
        GaugeField { dims, links }
    }

    /// Build from a raw link vector (length must be `4 * volume`).
    pub fn from_links(dims: LatticeDims, links: Vec<ColorMatrix>) -> GaugeField {
        assert_eq!(links.len(), dims.volume() * 4, "link count must be 4 * volume");
        GaugeField { dims, links }
    }

    /// All links zero. Only useful as a scatter target (block-local copies);
    /// a zero link is not a valid gauge configuration.
    pub(crate) fn zeroed(dims: LatticeDims) -> GaugeField {
        GaugeField { dims, links: vec![ColorMatrix::ZERO; dims.volume() * 4] }
    }

    pub fn dims(&self) -> LatticeDims {
        self.dims
    }

    #[inline]
    pub fn link(&self, site: usize, mu: usize) -> &ColorMatrix {
        &self.links[site * 4 + mu]
    }

    pub fn link_mut(&mut self, site: usize, mu: usize) -> &mut ColorMatrix {
        &mut self.links[site * 4 + mu]
    }

    pub fn links(&self) -> &[ColorMatrix] {
        &self.links
    }

    /// Links whose unitarity deviation exceeds `tol` (defaults to the
    /// external-input tolerance when loading files).
    pub fn unitarity_violations(&self, tol: f64) -> Vec<UnitarityViolation> {
        let mut out = Vec::new();
        for site in 0..self.dims.volume() {
            for mu in 0..4 {
                let deviation = self.link(site, mu).unitarity_deviation();
                if deviation > tol {
                    out.push(UnitarityViolation { site, mu, deviation });
                }
            }
        }
        out
    }

    pub fn validate_unitarity(&self) -> Vec<UnitarityViolation> {
        self.unitarity_violations(TOL_INPUT)
    }

    /// Round-trip every link through two-row compression. The result should
    /// be indistinguishable from the original for unitary links; used to
    /// validate the compressed storage scheme end to end.
    pub fn compressed_roundtrip(&self) -> Result<GaugeField, Su3Error> {
        let mut links = Vec::with_capacity(self.links.len());
        for u in &self.links {
            links.push(reconstruct_third_row(&compress(u))?);
        }
        Ok(GaugeField { dims: self.dims, links })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FermionField {
    dims: LatticeDims,
    sites: Vec<Spinor>,
}

impl FermionField {
    pub fn zero(dims: LatticeDims) -> FermionField {
        FermionField { dims, sites: vec![Spinor::ZERO; dims.volume()] }
    }

    /// The same spinor at every site.
    pub fn constant(dims: LatticeDims, value: Spinor) -> FermionField {
        FermionField { dims, sites: vec![value; dims.volume()] }
    }

    /// Every component uniform in `[-1, 1)` from the stream
    /// `derived(seed, site)`, components drawn spin-major, re before im.
    pub fn random(dims: LatticeDims, seed: u64) -> FermionField {
        let v = dims.volume();
        let mut sites = Vec::with_capacity(v);
        for site in 0..v {
            let mut rng = Counter64::derived(seed, site as u64);
            let mut s = Spinor::ZERO;
            for vec in s.0.iter_mut() {
                for z in vec.0.iter_mut() {
                    let re = rng.next_symmetric();
                    let im = rng.next_symmetric();
                    *z = c(re, im);
                }
            }
            sites.push(s);
        }
        FermionField { dims, sites }
    }

    pub fn from_sites(dims: LatticeDims, sites: Vec<Spinor>) -> FermionField {
        assert_eq!(sites.len(), dims.volume(), "site count must equal volume");
        FermionField { dims, sites }
    }

    pub fn dims(&self) -> LatticeDims {
        self.dims
    }

    #[inline]
    pub fn site(&self, n: usize) -> &Spinor {
        &self.sites[n]
    }

    pub fn site_mut(&mut self, n: usize) -> &mut Spinor {
        &mut self.sites[n]
    }

    pub fn sites(&self) -> &[Spinor] {
        &self.sites
    }

    pub fn sites_mut(&mut self) -> &mut [Spinor] {
        &mut self.sites
    }

    /// `self += a * other`, component-wise with a real scalar.
    pub fn axpy(&mut self, a: f64, other: &FermionField) {
        debug_assert_eq!(self.dims, other.dims);
        for (s, o) in self.sites.iter_mut().zip(other.sites.iter()) {
            for (sv, ov) in s.0.iter_mut().zip(o.0.iter()) {
                for (sz, oz) in sv.0.iter_mut().zip(ov.0.iter()) {
                    sz.re += a * oz.re;
                    sz.im += a * oz.im;
                }
            }
        }
    }

    /// `self = other + b * self` (the conjugate-gradient direction update).
    pub fn xpay(&mut self, other: &FermionField, b: f64) {
        debug_assert_eq!(self.dims, other.dims);
        for (s, o) in self.sites.iter_mut().zip(other.sites.iter()) {
            for (sv, ov) in s.0.iter_mut().zip(o.0.iter()) {
                for (sz, oz) in sv.0.iter_mut().zip(ov.0.iter()) {
                    sz.re = oz.re + b * sz.re;
                    sz.im = oz.im + b * sz.im;
                }
            }
        }
    }

    pub fn sub(&self, other: &FermionField) -> FermionField {
        debug_assert_eq!(self.dims, other.dims);
        let sites = self
            .sites
            .iter()
            .zip(other.sites.iter())
            .map(|(a, b)| a.sub(b))
            .collect();
        FermionField { dims: self.dims, sites }
    }

    /// Apply gamma5 at every site (sign routing, no flops).
    pub fn gamma5(&self) -> FermionField {
        FermionField { dims: self.dims, sites: self.sites.iter().map(|s| s.gamma5()).collect() }
    }

    /// Largest component-wise complex-modulus difference.
    pub fn max_abs_diff(&self, other: &FermionField) -> f64 {
        self.sites
            .iter()
            .zip(other.sites.iter())
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    /// True when every component is bit-identical (including zero signs).
    pub fn bits_equal(&self, other: &FermionField) -> bool {
        if self.dims != other.dims {
            return false;
        }
        self.sites.iter().zip(other.sites.iter()).all(|(a, b)| {
            a.0.iter().zip(b.0.iter()).all(|(av, bv)| {
                av.0.iter().zip(bv.0.iter()).all(|(az, bz)| {
                    az.re.to_bits() == bz.re.to_bits() && az.im.to_bits() == bz.im.to_bits()
                })
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeDims;

    fn dims() -> LatticeDims {
        LatticeDims::new(2, 2).unwrap()
    }

    #[test]
    fn unit_field_links_are_identity() {
        let g = GaugeField::unit(dims());
        for site in 0..dims().volume() {
            for mu in 0..4 {
                assert_eq!(*g.link(site, mu), ColorMatrix::IDENTITY);
            }
        }
    }

    #[test]
    fn random_gauge_is_deterministic_and_seed_sensitive() {
        let a = GaugeField::random(dims(), 42);
        let b = GaugeField::random(dims(), 42);
        let c = GaugeField::random(dims(), 43);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn random_gauge_links_are_unitary() {
        let g = GaugeField::random(dims(), 7);
        assert!(g.validate_unitarity().is_empty());
    }

    #[test]
    fn unitarity_check_reports_bad_link() {
        let mut g = GaugeField::unit(dims());
        g.link_mut(3, 2).0[0][0].re = 2.0;
        let violations = g.validate_unitarity();
        assert_eq!(violations.len(), 1);
        assert_eq!((violations[0].site, violations[0].mu), (3, 2));
        assert!(violations[0].deviation > 1.0);
    }

    #[test]
    fn compressed_roundtrip_reproduces_random_gauge() {
        let g = GaugeField::random(dims(), 11);
        let rt = g.compressed_roundtrip().unwrap();
        let mut max_diff: f64 = 0.0;
        for site in 0..dims().volume() {
            for mu in 0..4 {
                max_diff = max_diff.max(g.link(site, mu).max_abs_diff(rt.link(site, mu)));
            }
        }
        assert!(max_diff <= 1e-13, "round-trip drift {max_diff}");
    }

    #[test]
    fn axpy_and_xpay_do_what_they_say() {
        let d = dims();
        let a = FermionField::random(d, 1);
        let b = FermionField::random(d, 2);

        let mut y = a.clone();
        y.axpy(2.0, &b);
        for n in 0..d.volume() {
            let want = a.site(n).add(&b.site(n).scale(2.0));
            assert!(y.site(n).max_abs_diff(&want) <= 1e-15);
        }

        let mut p = a.clone();
        p.xpay(&b, 0.5);
        for n in 0..d.volume() {
            let want = b.site(n).add(&a.site(n).scale(0.5));
            assert!(p.site(n).max_abs_diff(&want) <= 1e-15);
        }
    }

    #[test]
    fn random_fermion_is_deterministic() {
        let a = FermionField::random(dims(), 9);
        let b = FermionField::random(dims(), 9);
        assert!(a.bits_equal(&b));
        let c = FermionField::random(dims(), 10);
        assert!(!a.bits_equal(&c));
    }
}
