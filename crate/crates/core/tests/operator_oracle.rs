//! Oracle tests for the Wilson-Dirac operator: the sparse stencil is
//! checked against a dense matrix built column by column, against an
//! independently written coordinate-space reference, and against its own
//! algebraic identities (gamma5-hermiticity, adjointness, positivity,
//! locality, translation covariance).

use wilson_cg::dense::{build_dense, build_dense_op, flatten_field, gamma5_sign, site_block_mask};
use wilson_cg::dirac::{
    apply_d, apply_d_blockwise, apply_ddag, apply_normal, apply_stencil, apply_stencil_staged,
    apply_stencil_unprojected,
};
use wilson_cg::lattice::{site_coords, site_index, split_blocks, BoundaryCondition, NeighborTable};
use wilson_cg::solver::dot;
use wilson_cg::spinor::Spinor;
use wilson_cg::su3::{c, Complex, C_ZERO};
use wilson_cg::{ExecMode, FermionField, GaugeField, LatticeDims};

fn dims(l: usize, t: usize) -> LatticeDims {
    LatticeDims::new(l, t).unwrap()
}

fn table(d: LatticeDims) -> NeighborTable {
    NeighborTable::build(d, BoundaryCondition::AntiperiodicTime)
}

/// a·psi + b·phi with complex coefficients, combined site by site.
fn combine(a: Complex, psi: &FermionField, b: Complex, phi: &FermionField) -> FermionField {
    let mut out = FermionField::zero(psi.dims());
    for n in 0..psi.dims().volume() {
        for spin in 0..4 {
            out.site_mut(n).0[spin] = psi
                .site(n)
                .0[spin]
                .scale_complex(a)
                .add(&phi.site(n).0[spin].scale_complex(b));
        }
    }
    out
}

#[test]
fn gamma5_sandwich_equals_the_adjoint_matrix() {
    for (l, t) in [(2, 2), (2, 4)] {
        let d = dims(l, t);
        let tbl = table(d);
        for seed in 0..20u64 {
            let gauge = GaugeField::random(d, seed);
            let kappa = 0.05 + 0.015 * (seed % 5) as f64;
            let m = build_dense(&gauge, &tbl, kappa).unwrap();
            let n = m.n();
            let mut worst = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    let sandwich = m.get(i, j) * gamma5_sign(i) * gamma5_sign(j);
                    let adjoint = m.get(j, i).conj();
                    worst = worst.max((sandwich - adjoint).norm());
                }
            }
            assert!(worst <= 1e-13, "{l}^3x{t} seed {seed}: deviation {worst:.3e}");
        }
    }
}

#[test]
fn gamma5_sandwich_also_holds_with_periodic_time() {
    let d = dims(2, 4);
    let tbl = NeighborTable::build(d, BoundaryCondition::Periodic);
    let gauge = GaugeField::random(d, 77);
    let m = build_dense(&gauge, &tbl, 0.125).unwrap();
    for i in 0..m.n() {
        for j in 0..m.n() {
            let sandwich = m.get(i, j) * gamma5_sign(i) * gamma5_sign(j);
            assert!((sandwich - m.get(j, i).conj()).norm() <= 1e-13);
        }
    }
}

#[test]
fn dense_of_the_adjoint_application_matches_the_matrix_adjoint() {
    let d = dims(2, 2);
    let tbl = table(d);
    let gauge = GaugeField::random(d, 5);
    let kappa = 0.11;
    let m = build_dense(&gauge, &tbl, kappa).unwrap();
    let m_dag = build_dense_op(d, |psi| apply_ddag(&gauge, psi, &tbl, kappa, ExecMode::Deterministic))
        .unwrap();
    assert!(m_dag.max_abs_diff(&m.adjoint()) <= 1e-13);
}

#[test]
fn full_application_matches_the_dense_matrix_vector_product() {
    let d = dims(2, 2);
    let tbl = table(d);
    let gauge = GaugeField::random(d, 9);
    let psi = FermionField::random(d, 10);
    let kappa = 0.125;
    let m = build_dense(&gauge, &tbl, kappa).unwrap();
    let sparse = flatten_field(&apply_d(&gauge, &psi, &tbl, kappa, ExecMode::Deterministic));
    let dense = m.apply(&flatten_field(&psi));
    let worst = sparse
        .iter()
        .zip(dense.iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0f64, f64::max);
    assert!(worst <= 1e-13, "deviation {worst:.3e}");
}

#[test]
fn operator_is_linear_in_the_field() {
    let d = dims(2, 2);
    let tbl = table(d);
    let gauge = GaugeField::random(d, 21);
    let psi = FermionField::random(d, 22);
    let phi = FermionField::random(d, 23);
    let (a, b) = (c(0.7, -0.4), c(-1.3, 0.2));
    let kappa = 0.125;
    let lhs = apply_d(&gauge, &combine(a, &psi, b, &phi), &tbl, kappa, ExecMode::Deterministic);
    let rhs = combine(
        a,
        &apply_d(&gauge, &psi, &tbl, kappa, ExecMode::Deterministic),
        b,
        &apply_d(&gauge, &phi, &tbl, kappa, ExecMode::Deterministic),
    );
    assert!(lhs.max_abs_diff(&rhs) <= 1e-13);
}

#[test]
fn dense_blocks_connect_only_the_site_and_its_neighbors() {
    let d = dims(2, 4);
    let tbl = table(d);
    let gauge = GaugeField::random(d, 31);
    let m = build_dense(&gauge, &tbl, 0.125).unwrap();
    let mask = site_block_mask(&m, d, 1e-14);
    for i in 0..d.volume() {
        let mut allowed = vec![false; d.volume()];
        allowed[i] = true;
        for mu in 0..4 {
            allowed[tbl.fwd(i, mu)] = true;
            allowed[tbl.bwd(i, mu)] = true;
        }
        assert_eq!(mask[i], allowed, "row {i} couples beyond nearest neighbors");
    }
}

#[test]
fn point_source_spreads_to_at_most_nine_sites() {
    let d = dims(4, 8);
    let tbl = table(d);
    let gauge = GaugeField::random(d, 32);
    let source = wilson_cg::make_point_source(d, 137, 2, 1).unwrap();
    let image = apply_d(&gauge, &source, &tbl, 0.125, ExecMode::Deterministic);
    let support: Vec<usize> =
        (0..d.volume()).filter(|&n| image.site(n).norm_sq() > 0.0).collect();
    assert!(support.len() <= 9, "support on {} sites", support.len());
    for n in support {
        let neighbor = n == 137
            || (0..4).any(|mu| tbl.fwd(137, mu) == n || tbl.bwd(137, mu) == n);
        assert!(neighbor, "site {n} is not the source or one of its neighbors");
    }
}

#[test]
fn adjointness_holds_matrix_free_at_scale() {
    let d = dims(4, 8);
    let tbl = table(d);
    let gauge = GaugeField::random(d, 41);
    let psi = FermionField::random(d, 42);
    let phi = FermionField::random(d, 43);
    let kappa = 0.125;
    let lhs = dot(&phi, &apply_d(&gauge, &psi, &tbl, kappa, ExecMode::Deterministic), ExecMode::Deterministic).unwrap();
    let rhs = dot(&apply_ddag(&gauge, &phi, &tbl, kappa, ExecMode::Deterministic), &psi, ExecMode::Deterministic).unwrap();
    assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm().max(1.0), "{lhs} vs {rhs}");
}

#[test]
fn normal_operator_is_hermitian_and_positive() {
    let d = dims(4, 8);
    let tbl = table(d);
    let gauge = GaugeField::random(d, 51);
    let psi = FermionField::random(d, 52);
    let phi = FermionField::random(d, 53);
    let kappa = 0.125;
    let n_psi = apply_normal(&gauge, &psi, &tbl, kappa, ExecMode::Deterministic);
    let n_phi = apply_normal(&gauge, &phi, &tbl, kappa, ExecMode::Deterministic);

    let lhs = dot(&phi, &n_psi, ExecMode::Deterministic).unwrap();
    let rhs = dot(&psi, &n_phi, ExecMode::Deterministic).unwrap().conj();
    assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm().max(1.0));

    let quad = dot(&psi, &n_psi, ExecMode::Deterministic).unwrap();
    assert!(quad.re > 0.0);
    assert!(quad.im.abs() <= 1e-12 * quad.re);
}

#[test]
fn half_spinor_path_matches_the_unprojected_path_with_half_the_products() {
    let d = dims(4, 8);
    let tbl = table(d);
    let gauge = GaugeField::random(d, 61);
    let psi = FermionField::random(d, 62);
    let kappa = 0.125;
    for n in 0..d.volume() {
        let fast = apply_stencil(&gauge, &psi, &tbl, kappa, n);
        let (_, counts) = apply_stencil_staged(&gauge, &psi, &tbl, kappa, n);
        let (naive, calls) = apply_stencil_unprojected(&gauge, &psi, &tbl, kappa, n);
        assert!(fast.max_abs_diff(&naive) <= 1e-14, "site {n}");
        assert_eq!(counts.mat_vec_calls, 16);
        assert_eq!(calls, 32);
    }
}

#[test]
fn compressed_links_reproduce_the_operator() {
    let d = dims(4, 8);
    let tbl = table(d);
    let gauge = GaugeField::random(d, 71);
    let psi = FermionField::random(d, 72);
    let kappa = 0.125;
    let roundtripped = gauge.compressed_roundtrip().unwrap();
    let direct = apply_d(&gauge, &psi, &tbl, kappa, ExecMode::Deterministic);
    let compressed = apply_d(&roundtripped, &psi, &tbl, kappa, ExecMode::Deterministic);
    assert!(direct.max_abs_diff(&compressed) <= 1e-12);
}

#[test]
fn blockwise_application_is_bit_identical_to_the_global_sweep() {
    let d = dims(6, 8);
    let tbl = table(d);
    let gauge = GaugeField::random(d, 81);
    let psi = FermionField::random(d, 82);
    let kappa = 0.125;
    let decomp = split_blocks(d, 3).unwrap();
    let global = apply_d(&gauge, &psi, &tbl, kappa, ExecMode::Deterministic);
    let blocked = apply_d_blockwise(&gauge, &psi, &tbl, kappa, &decomp);
    assert!(blocked.bits_equal(&global));
}

#[test]
fn blockwise_application_handles_spatial_splits_and_tiny_extents() {
    for (l, t, axis) in [(2, 4, 0), (4, 4, 2), (4, 2, 3)] {
        let d = dims(l, t);
        let tbl = table(d);
        let gauge = GaugeField::random(d, 90 + axis as u64);
        let psi = FermionField::random(d, 95 + axis as u64);
        let decomp = split_blocks(d, axis).unwrap();
        let global = apply_d(&gauge, &psi, &tbl, 0.125, ExecMode::Deterministic);
        let blocked = apply_d_blockwise(&gauge, &psi, &tbl, 0.125, &decomp);
        assert!(blocked.bits_equal(&global), "{l}^3x{t} axis {axis}");
    }
}

#[test]
fn translations_commute_with_the_operator() {
    // With periodic boundaries, shifting every field by one site along mu
    // and applying the operator is the same arithmetic site by site, so
    // the outputs must agree bit for bit after shifting back.
    let d = dims(2, 4);
    let tbl = NeighborTable::build(d, BoundaryCondition::Periodic);
    let gauge = GaugeField::random(d, 101);
    let psi = FermionField::random(d, 102);
    let kappa = 0.125;
    let reference = apply_d(&gauge, &psi, &tbl, kappa, ExecMode::Deterministic);

    for mu in 0..4 {
        let extent = [d.l(), d.l(), d.l(), d.t()];
        let shift = |n: usize| {
            let mut coords = site_coords(d, n);
            coords[mu] = (coords[mu] + 1) % extent[mu];
            site_index(d, coords).unwrap()
        };
        let mut shifted_gauge = GaugeField::unit(d);
        let mut shifted_psi = FermionField::zero(d);
        for n in 0..d.volume() {
            let target = shift(n);
            *shifted_psi.site_mut(target) = *psi.site(n);
            for nu in 0..4 {
                *shifted_gauge.link_mut(target, nu) = *gauge.link(n, nu);
            }
        }
        let shifted_image = apply_d(&shifted_gauge, &shifted_psi, &tbl, kappa, ExecMode::Deterministic);
        let mut unshifted = FermionField::zero(d);
        for n in 0..d.volume() {
            *unshifted.site_mut(n) = *shifted_image.site(shift(n));
        }
        assert!(unshifted.bits_equal(&reference), "direction {mu}");
    }
}

/// Gamma matrices transcribed independently for the reference stencil.
fn reference_gamma(mu: usize) -> [[Complex; 4]; 4] {
    let o = C_ZERO;
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match mu {
        0 => [[o, o, o, i], [o, o, i, o], [o, -i, o, o], [-i, o, o, o]],
        1 => [[o, o, o, -one], [o, o, one, o], [o, one, o, o], [-one, o, o, o]],
        2 => [[o, o, i, o], [o, o, o, -i], [-i, o, o, o], [o, i, o, o]],
        3 => [[o, o, one, o], [o, o, o, one], [one, o, o, o], [o, one, o, o]],
        _ => unreachable!(),
    }
}

/// (1 ± gamma_mu) psi computed densely over spin, colors independent.
fn reference_project(mu: usize, plus: bool, s: &Spinor) -> Spinor {
    let g = reference_gamma(mu);
    let mut out = *s;
    for a in 0..4 {
        for b in 0..4 {
            let coeff = if plus { g[a][b] } else { -g[a][b] };
            if coeff != C_ZERO {
                for color in 0..3 {
                    out.0[a].0[color] += coeff * s.0[b].0[color];
                }
            }
        }
    }
    out
}

/// The operator written directly from its definition in coordinates,
/// sharing no code with the production stencil.
fn reference_apply(
    gauge: &GaugeField,
    psi: &FermionField,
    kappa: f64,
    n: usize,
) -> Spinor {
    let d = gauge.dims();
    let extent = [d.l(), d.l(), d.l(), d.t()];
    let coords = site_coords(d, n);
    let mut out = *psi.site(n);
    for mu in 0..4 {
        // Forward hop, with the antiperiodic sign on a time wrap.
        let mut up = coords;
        up[mu] = (coords[mu] + 1) % extent[mu];
        let up_idx = site_index(d, up).unwrap();
        let fwd_sign = if mu == 3 && coords[3] + 1 == extent[3] { -1.0 } else { 1.0 };
        let h = reference_project(mu, false, psi.site(up_idx));
        let u = gauge.link(n, mu);
        for spin in 0..4 {
            for row in 0..3 {
                let mut acc = C_ZERO;
                for col in 0..3 {
                    acc += u.0[row][col] * h.0[spin].0[col];
                }
                out.0[spin].0[row] += acc * (kappa * fwd_sign);
            }
        }

        // Backward hop with the adjoint link from the neighbor.
        let mut down = coords;
        down[mu] = (coords[mu] + extent[mu] - 1) % extent[mu];
        let down_idx = site_index(d, down).unwrap();
        let bwd_sign = if mu == 3 && coords[3] == 0 { -1.0 } else { 1.0 };
        let h = reference_project(mu, true, psi.site(down_idx));
        let u = gauge.link(down_idx, mu);
        for spin in 0..4 {
            for row in 0..3 {
                let mut acc = C_ZERO;
                for col in 0..3 {
                    acc += u.0[col][row].conj() * h.0[spin].0[col];
                }
                out.0[spin].0[row] += acc * (kappa * bwd_sign);
            }
        }
    }
    out
}

#[test]
fn independent_coordinate_reference_agrees_with_the_stencil() {
    let d = dims(2, 4);
    let tbl = table(d);
    let gauge = GaugeField::random(d, 111);
    let psi = FermionField::random(d, 112);
    let kappa = 0.11;
    for n in 0..d.volume() {
        let production = apply_stencil(&gauge, &psi, &tbl, kappa, n);
        let reference = reference_apply(&gauge, &psi, kappa, n);
        let diff = production.max_abs_diff(&reference);
        assert!(diff <= 1e-13, "site {n}: deviation {diff:.3e}");
    }
}
