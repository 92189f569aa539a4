mod common;

use jdisc_core::beltrami::{
    envelope_constant, jacobian_check, residual, select_exponent, solve_h, torus_distance, winding_number,
    BeltramiSolver, CoefficientPair, DiscSolution, MonomialTerm, SolverConfig,
};
use jdisc_core::discfield::{build_grid, dbar, dz, norm, ComplexField};
use jdisc_core::transforms::{estimate_norm, OperatorId};
use jdisc_core::Error;
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn w_pair(scale: f64) -> CoefficientPair {
    let t = MonomialTerm::new(c(scale, 0.0), 0, 0, 1, 0);
    CoefficientPair::with_measured_a0(vec![t.clone()], vec![t], 0.5).unwrap()
}

fn config(n: u32, nr: usize, na: usize) -> SolverConfig {
    SolverConfig { n, n_radial: nr, n_angular: na, ..SolverConfig::default() }
}

#[test]
fn zero_coefficients_reproduce_the_model_disc() {
    let solver = BeltramiSolver::new(CoefficientPair::zero(0.5), config(3, 16, 64)).unwrap();
    let (sol, report) = solver.outer_iterate().unwrap();
    assert_eq!(report.outer_iters, 1);
    let grid = solver.grid();
    let zeta = ComplexField::from_fn(grid, |z| z);
    let cube = ComplexField::from_fn(grid, |z| z * z * z);
    assert!((&sol.z - &zeta).sup() <= 1e-14);
    assert!((&sol.w - &cube).sup() <= 1e-14);
    assert_eq!(report.history.sup_u.len(), report.outer_iters);
    assert_eq!(report.history.h_norm_p.len(), report.outer_iters);
}

#[test]
fn exponent_selection() {
    let grid = build_grid(32, 128).unwrap();
    let pair =
        CoefficientPair::with_measured_a0(vec![MonomialTerm::new(c(0.2, 0.0), 0, 0, 1, 0)], vec![], 0.5).unwrap();
    assert!((pair.a0() - 0.3).abs() < 1e-12);
    let (p, est) = select_exponent(&grid, &pair, &[2.25, 2.5, 3.0], 1.05, 8, 0).unwrap();
    assert!([2.25, 2.5, 3.0].contains(&p));
    assert!(pair.a0() * 1.05 * est < 1.0);
    let tight = CoefficientPair::new(vec![MonomialTerm::new(c(0.1, 0.0), 0, 0, 1, 0)], vec![], 0.5, 0.999).unwrap();
    assert!(matches!(select_exponent(&grid, &tight, &[2.25], 1.05, 8, 0), Err(Error::Infeasible { .. })));
}

#[test]
fn inner_solution_respects_the_a_priori_bound() {
    let grid = build_grid(32, 128).unwrap();
    let pair =
        CoefficientPair::with_measured_a0(vec![MonomialTerm::new(c(0.1, 0.0), 0, 0, 1, 0)], vec![], 0.5).unwrap();
    let p = 2.5;
    let est = estimate_norm(&grid, OperatorId::R0, p, 16, 0).unwrap().estimate;
    let zero = ComplexField::zeros(&grid);
    let res = solve_h(&zero, &zero, &pair, 8, p, 1e-12, 100, None).unwrap();
    // with u = v = 0 the coefficient is A = 0.1 ζ^7
    let a_field = ComplexField::from_fn(&grid, |z| 0.1 * z.powu(7));
    let a_norm = norm(&a_field, p).unwrap();
    assert!((a_norm - res.a_norm).abs() < 1e-12);
    assert!(res.h_norm <= a_norm / (1.0 - pair.a0() * est * 1.05) + 1e-12);
    assert!(res.max_ratio <= pair.a0() * est + 0.05);
}

#[test]
fn inner_iteration_cap_is_reported() {
    let grid = build_grid(16, 64).unwrap();
    let pair = w_pair(0.3);
    let zero = ComplexField::zeros(&grid);
    match solve_h(&zero, &zero, &pair, 2, 2.5, 1e-30, 3, None) {
        Err(Error::NonConvergence { iterations, history, .. }) => {
            assert_eq!(iterations, 3);
            assert_eq!(history.len(), 3);
        }
        other => panic!("expected non-convergence, got {other:?}"),
    }
}

#[test]
fn outer_iteration_cap_is_reported() {
    let cfg = SolverConfig { max_outer: 2, ..config(4, 16, 64) };
    let solver = BeltramiSolver::new(w_pair(0.3), cfg).unwrap();
    match solver.outer_iterate() {
        Err(Error::NonConvergence { stage, history, .. }) => {
            assert!(stage.contains("outer"));
            assert_eq!(history.len(), 2);
        }
        other => panic!("expected non-convergence, got {other:?}"),
    }
}

#[test]
fn converged_disc_satisfies_the_system() {
    let solver = BeltramiSolver::new(w_pair(0.1), config(8, 48, 192)).unwrap();
    let (sol, report) = solver.outer_iterate().unwrap();
    assert!(report.converged);
    let res = residual(&sol, solver.coeffs());
    assert!(res.pde() <= 1e-5, "{res:?}");
    assert!(res.boundary() <= 1e-6);
    assert!(torus_distance(&sol) <= 1e-6);
    assert!(report.max_boundary_re_uv <= 1e-8);
    assert_eq!(winding_number(&sol.z.boundary_trace()).unwrap(), 1);
    let (min_j, ok) = jacobian_check(&sol);
    assert!(ok && min_j > 0.0);
    // |∂̄z| / |∂z| is |a| ≤ a0 wherever ∂z ≠ 0
    let ratio = dbar(&sol.z).zip_map(&dz(&sol.z), |a, b| c(a.norm() / b.norm(), 0.0));
    assert!(ratio.values().iter().all(|r| r.re <= solver.coeffs().a0() + 1e-8));
    // Cartesian differences of an off-grid interpolant, independent of the spectral derivatives
    for k in 0..12 {
        let zeta = Complex64::from_polar(0.1 + 0.07 * k as f64, 0.9 * k as f64);
        let (zz, zb) = common::wirtinger_fd(&sol.z, zeta, 1e-4);
        let (_, wb) = common::wirtinger_fd(&sol.w, zeta, 1e-4);
        let (z, w) = (common::interpolate(&sol.z, zeta), common::interpolate(&sol.w, zeta));
        let coeffs = solver.coeffs();
        assert!((zb - coeffs.a(z, w) * zz.conj()).norm() <= 1e-5, "z equation at {zeta}");
        assert!((wb - coeffs.b(z, w) * zz.conj()).norm() <= 1e-5, "w equation at {zeta}");
    }
    // |w| ≤ C |ζ|^n pointwise
    let cst = envelope_constant(&sol);
    for (zeta, w) in solver.grid().points().zip(sol.w.values()) {
        assert!(w.norm() <= cst * zeta.norm().powi(8) * (1.0 + 1e-12) + 1e-300);
    }
}

#[test]
fn w_vanishes_to_order_n() {
    let n = 4;
    let solver = BeltramiSolver::new(w_pair(0.1), config(n, 32, 128)).unwrap();
    let (sol, _) = solver.outer_iterate().unwrap();
    // on the innermost ring the angular modes below n carry no energy beyond r^n scaling
    let spec = sol.w.spectrum();
    let grid = solver.grid();
    let r = grid.radial_nodes()[0];
    for m in 0..n as i64 {
        let bin = grid.bin_of(m).unwrap();
        assert!(spec.coeff(0, bin).norm() <= 1e-10 * r.powi(n as i32).max(1e-300) + 1e-14, "mode {m}");
    }
    let bin_n = grid.bin_of(n as i64).unwrap();
    assert!(spec.coeff(0, bin_n).norm() > 0.5 * r.powi(n as i32));
}

#[test]
fn sup_of_u_decreases_with_n() {
    let mut sups = Vec::new();
    for n in [8, 16, 32] {
        let solver = BeltramiSolver::new(w_pair(0.1), config(n, 32, 128)).unwrap();
        let (sol, _) = solver.outer_iterate().unwrap();
        sups.push(sol.u.sup());
    }
    assert!(sups[0] > sups[1] && sups[1] > sups[2], "{sups:?}");
}

#[test]
fn trivial_solution_helpers() {
    let grid = build_grid(16, 32).unwrap();
    let sol = DiscSolution::trivial(&grid, 5);
    assert_eq!(envelope_constant(&sol), 1.0);
    assert!(torus_distance(&sol) <= 1e-14);
    let r = residual(&sol, &CoefficientPair::zero(0.5));
    assert!(r.pde() <= 1e-10);
}

#[test]
fn mismatched_grid_is_a_usage_error() {
    let grid = build_grid(16, 32).unwrap();
    assert!(matches!(
        BeltramiSolver::with_grid(CoefficientPair::zero(0.5), config(2, 32, 64), grid),
        Err(Error::Usage(_))
    ));
}
