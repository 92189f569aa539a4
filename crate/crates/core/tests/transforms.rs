mod common;

use common::{bergman_oracle, beurling_oracle, c, cauchy_oracle, probe_nodes, Poly};
use jdisc_core::discfield::{build_grid, dbar, dz, norm, ComplexField};
use jdisc_core::transforms::{ahlfors_beurling, bergman, cauchy_green, estimate_norm, r0, t0, OperatorId};
use num_complex::Complex64;

#[test]
fn cauchy_green_matches_area_quadrature() {
    let grid = build_grid(32, 64).unwrap();
    for seed in 0..3 {
        let f = Poly::seeded(6, seed);
        let tf = cauchy_green(&f.field(&grid));
        for (idx, zeta) in probe_nodes(&grid, 0.9, 12) {
            let want = cauchy_oracle(&f, zeta);
            let got = tf.values()[idx];
            assert!((got - want).norm() < 1e-9, "seed {seed} at {zeta}: {got} vs {want}");
        }
    }
}

#[test]
fn ahlfors_beurling_matches_principal_value() {
    let grid = build_grid(32, 64).unwrap();
    for seed in 10..13 {
        let f = Poly::seeded(6, seed);
        let rf = ahlfors_beurling(&f.field(&grid));
        for (idx, zeta) in probe_nodes(&grid, 0.8, 12) {
            let want = beurling_oracle(&f, zeta);
            let got = rf.values()[idx];
            assert!((got - want).norm() < 1e-8, "seed {seed} at {zeta}: {got} vs {want}");
        }
    }
}

#[test]
fn beurling_of_conjugate_monomial() {
    // T(ζ̄) = ζ̄²/2 inside the disc, so R(ζ̄) = 0
    let grid = build_grid(24, 48).unwrap();
    let f = Poly::monomial(0, 1);
    let field = f.field(&grid);
    let half_sq = ComplexField::from_fn(&grid, |z: Complex64| z.conj() * z.conj() / 2.0);
    assert!((&cauchy_green(&field) - &half_sq).sup() < 1e-13);
    let rf = ahlfors_beurling(&field);
    assert!(rf.sup() < 1e-12);
    for (_, zeta) in probe_nodes(&grid, 0.8, 10) {
        assert!(beurling_oracle(&f, zeta).norm() < 1e-9);
    }
}

#[test]
fn bergman_matches_kernel_quadrature() {
    let grid = build_grid(32, 64).unwrap();
    for seed in 20..23 {
        let f = Poly::seeded(6, seed);
        let bf = bergman(&f.field(&grid));
        for (idx, zeta) in probe_nodes(&grid, 0.8, 12) {
            let want = bergman_oracle(&f, zeta);
            assert!((bf.values()[idx] - want).norm() < 1e-9, "seed {seed} at {zeta}");
        }
    }
}

#[test]
fn bergman_sign_on_holomorphic_and_antiholomorphic() {
    let grid = build_grid(16, 32).unwrap();
    for k in 0..5 {
        let f = Poly::monomial(k, 0).field(&grid);
        assert!((&bergman(&f) + &f).sup() < 1e-12, "B(ζ^{k}) = −ζ^{k}");
        let g = Poly::monomial(0, k + 1).field(&grid);
        assert!(bergman(&g).sup() < 1e-12);
    }
}

#[test]
fn dbar_inverts_cauchy_green() {
    let grid = build_grid(32, 128).unwrap();
    for seed in 0..10 {
        let f = Poly::seeded(8, seed).field(&grid);
        let err = (&dbar(&cauchy_green(&f)) - &f).interior_sup();
        assert!(err < 1e-6, "seed {seed}: {err}");
    }
}

#[test]
fn t0_boundary_is_imaginary_and_r0_is_its_derivative() {
    let grid = build_grid(32, 128).unwrap();
    for seed in 0..10 {
        let f = Poly::seeded(8, 100 + seed).field(&grid);
        let tf = t0(&f);
        let re = tf.boundary_trace().values.iter().map(|v| v.re.abs()).fold(0.0, f64::max);
        assert!(re <= 1e-8, "seed {seed}: {re}");
        assert!((&r0(&f) - &dz(&tf)).sup() <= 1e-6);
        assert!((&dbar(&tf) - &f).interior_sup() <= 1e-6);
    }
}

#[test]
fn r0_is_an_l2_isometry_on_probes() {
    let grid = build_grid(32, 128).unwrap();
    for seed in 0..100 {
        let f = Poly::seeded(8, 1000 + seed).field(&grid);
        let ratio = norm(&r0(&f), 2.0).unwrap() / norm(&f, 2.0).unwrap();
        assert!((ratio - 1.0).abs() <= 1e-6, "seed {seed}: {ratio}");
    }
}

#[test]
fn r0_is_real_linear_not_complex_linear() {
    let grid = build_grid(16, 64).unwrap();
    let f = Poly::seeded(5, 3).field(&grid);
    let i = c(0.0, 1.0);
    let lhs = r0(&f.scale(i));
    let rhs = r0(&f).scale(i);
    assert!((&lhs - &rhs).sup() > 1e-3);
    let g = Poly::seeded(5, 4).field(&grid);
    let sum = r0(&(&f.scale(c(2.0, 0.0)) + &g));
    let parts = &r0(&f).scale(c(2.0, 0.0)) + &r0(&g);
    assert!((&sum - &parts).sup() < 1e-12);
}

#[test]
fn bergman_has_no_antiholomorphic_energy() {
    let grid = build_grid(32, 128).unwrap();
    for seed in 0..5 {
        let bf = bergman(&Poly::seeded(8, 50 + seed).field(&grid));
        let spec = bf.spectrum();
        let mut anti = 0.0;
        let mut total = 0.0;
        for k in 0..grid.n_angular() {
            let e: f64 = spec.profile(k).iter().zip(grid.radial_weights()).map(|(v, w)| v.norm_sqr() * w).sum();
            total += e;
            if grid.mode_of(k) < 0 {
                anti += e;
            }
        }
        assert!(anti <= 1e-8 * total);
    }
}

#[test]
fn norm_estimates() {
    let grid = build_grid(32, 128).unwrap();
    let r2 = estimate_norm(&grid, OperatorId::R, 2.0, 20, 1).unwrap();
    assert!(r2.estimate <= 1.0 + 1e-9 && r2.estimate > 0.5);
    let r0p = estimate_norm(&grid, OperatorId::R0, 3.0, 20, 1).unwrap();
    assert!(r0p.estimate >= 1.0 - 1e-6, "R0 is an L² isometry so probes sit near 1: {}", r0p.estimate);
    assert_eq!(r0p.alpha, Some(1.0 / 3.0));
    assert!(estimate_norm(&grid, OperatorId::R0, 1.0, 5, 1).is_err());
}

#[test]
fn boundary_data_of_t0_one() {
    // T0(1) = ζ̄ − ζ, purely imaginary on the circle
    let grid = build_grid(16, 32).unwrap();
    let one = ComplexField::constant(&grid, c(1.0, 0.0));
    let want = ComplexField::from_fn(&grid, |z: Complex64| z.conj() - z);
    assert!((&t0(&one) - &want).sup() < 1e-13);
}
