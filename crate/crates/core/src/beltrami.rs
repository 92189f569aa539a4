//! Solver for the quasilinear Beltrami system on the unit disc
//!
//! ```text
//! ∂z/∂ζ̄ = a(z, w) · ∂z̄/∂ζ̄,      ∂w/∂ζ̄ = b(z, w) · ∂z̄/∂ζ̄,
//! ```
//!
//! with `|z| = |w| = 1` on the unit circle. Solutions are sought as
//! `z = ζ e^u`, `w = ζ^n e^v` with `Re u = Re v = 0` on the circle, which turns the
//! system into
//!
//! ```text
//! h = A (1 + ζ̄ conj(R0 h)),   u = T0 h,   v = T0(B_c (1 + ζ̄ conj(R0 h))),
//! A   = a(ζe^u, ζ^n e^v) ζ^{-1} e^{ū − u},
//! B_c = b(ζe^u, ζ^n e^v) ζ^{-n} e^{ū − v}.
//! ```
//!
//! The inner equation for `h` is a contraction in `L^p` once `a0 ‖R0‖_p < 1`; the
//! outer map `(u, v) ↦ (U, V)` is iterated with damping.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::discfield::{build_grid, dbar, dz, norm, BoundaryTrace, ComplexField, DiscGrid};
use crate::transforms::{estimate_norm, r0, t0, OperatorId};
use crate::{Error, Result};

/// One term `c · z^i z̄^j w^k w̄^l` of a coefficient polynomial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialTerm {
    pub c: Complex64,
    pub i: u32,
    pub j: u32,
    pub k: u32,
    pub l: u32,
}

impl MonomialTerm {
    pub fn new(c: Complex64, i: u32, j: u32, k: u32, l: u32) -> Self {
        Self { c, i, j, k, l }
    }

    pub fn eval(&self, z: Complex64, w: Complex64) -> Complex64 {
        self.c * z.powu(self.i) * z.conj().powu(self.j) * w.powu(self.k) * w.conj().powu(self.l)
    }
}

/// The coefficients `a`, `b` of the system, with the overshoot margin `γ` and the
/// declared bound `a0 ≥ sup |a|` on `D̄ × (1+γ)D̄`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoefficientPair {
    a_terms: Vec<MonomialTerm>,
    b_terms: Vec<MonomialTerm>,
    gamma: f64,
    a0: f64,
}

impl CoefficientPair {
    pub fn new(a_terms: Vec<MonomialTerm>, b_terms: Vec<MonomialTerm>, gamma: f64, a0: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Config(format!("gamma must be positive, got {gamma}")));
        }
        if !(0.0..1.0).contains(&a0) {
            return Err(Error::Config(format!("a0 must lie in [0, 1), got {a0}")));
        }
        for (name, terms) in [("a", &a_terms), ("b", &b_terms)] {
            if let Some(t) = terms.iter().find(|t| t.k + t.l == 0) {
                return Err(Error::Config(format!(
                    "every term of {name} must carry w or w̄ (k + l ≥ 1); offending term has exponents ({}, {}, {}, {})",
                    t.i, t.j, t.k, t.l
                )));
            }
            if terms.iter().any(|t| !(t.c.re.is_finite() && t.c.im.is_finite())) {
                return Err(Error::Config(format!("non-finite coefficient in {name}")));
            }
        }
        let pair = Self { a_terms, b_terms, gamma, a0 };
        let sup = pair.sampled_sup_a();
        if sup > a0 + 1e-9 {
            return Err(Error::Config(format!("declared a0 = {a0} is below the sampled sup |a| = {sup}")));
        }
        Ok(pair)
    }

    /// Build with `a0` set to the sampled supremum of `|a|`.
    pub fn with_measured_a0(a_terms: Vec<MonomialTerm>, b_terms: Vec<MonomialTerm>, gamma: f64) -> Result<Self> {
        let probe = Self { a_terms: a_terms.clone(), b_terms: b_terms.clone(), gamma, a0: 0.0 };
        let sup = probe.sampled_sup_a();
        if sup >= 1.0 {
            return Err(Error::Ellipticity { sup_a: sup });
        }
        Self::new(a_terms, b_terms, gamma, sup)
    }

    pub fn zero(gamma: f64) -> Self {
        Self { a_terms: vec![], b_terms: vec![], gamma, a0: 0.0 }
    }

    pub fn a_terms(&self) -> &[MonomialTerm] {
        &self.a_terms
    }

    pub fn b_terms(&self) -> &[MonomialTerm] {
        &self.b_terms
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn is_zero(&self) -> bool {
        self.a_terms.iter().chain(&self.b_terms).all(|t| t.c == Complex64::new(0.0, 0.0))
    }

    pub fn a(&self, z: Complex64, w: Complex64) -> Complex64 {
        self.a_terms.iter().map(|t| t.eval(z, w)).sum()
    }

    pub fn b(&self, z: Complex64, w: Complex64) -> Complex64 {
        self.b_terms.iter().map(|t| t.eval(z, w)).sum()
    }

    /// Max of `|a|` over a polar sample of `D̄ × (1+γ)D̄` (9 radii × 24 angles per factor).
    pub fn sampled_sup_a(&self) -> f64 {
        let pts = |radius: f64| -> Vec<Complex64> {
            let mut v = Vec::new();
            for ir in 0..=8 {
                let r = radius * ir as f64 / 8.0;
                for it in 0..24 {
                    v.push(Complex64::from_polar(r, 2.0 * PI * it as f64 / 24.0));
                }
            }
            v
        };
        let zs = pts(1.0);
        let ws = pts(1.0 + self.gamma);
        let mut sup: f64 = 0.0;
        for &z in &zs {
            for &w in &ws {
                sup = sup.max(self.a(z, w).norm());
            }
        }
        sup
    }

    /// Smooth radial clamp factor keeping coefficient arguments in `|w| ≤ 1 + γ`:
    /// identity up to `1 + γ/2`, then a tanh saturation.
    pub fn clamp_factor(&self, modulus: f64) -> f64 {
        let knee = 1.0 + self.gamma / 2.0;
        if modulus <= knee {
            return 1.0;
        }
        let half = self.gamma / 2.0;
        (knee + half * ((modulus - knee) / half).tanh()) / modulus
    }
}

/// Which of the two structured coefficient fields to assemble.
#[derive(Clone, Copy, Debug)]
enum Which {
    A,
    B,
}

/// `A` or `B_c` on the grid. The singular factors `ζ^{-1}`, `ζ^{-n}` are cancelled
/// against the `ζ^{n(k+l)}` carried by every term, so nothing is divided near 0.
fn coefficient_field(
    coeffs: &CoefficientPair,
    which: Which,
    u: &ComplexField,
    v: &ComplexField,
    n: u32,
) -> ComplexField {
    let grid = u.grid();
    let (terms, shift) = match which {
        Which::A => (coeffs.a_terms(), 1i64),
        Which::B => (coeffs.b_terms(), n as i64),
    };
    let mut values = Vec::with_capacity(grid.len());
    for ir in 0..grid.n_radial() {
        let r = grid.radial_nodes()[ir];
        for ia in 0..grid.n_angular() {
            let theta = grid.angles()[ia];
            let idx = ir * grid.n_angular() + ia;
            let (uu, vv) = (u.values()[idx], v.values()[idx]);
            // |w| = r^n e^{Re v}
            let w_mod = r.powi(n as i32) * vv.re.exp();
            let kappa = coeffs.clamp_factor(w_mod);
            let tail = match which {
                Which::A => uu.conj() - uu,
                Which::B => uu.conj() - vv,
            };
            let mut acc = Complex64::new(0.0, 0.0);
            for t in terms {
                let p = t.i as i64 + (n as i64) * t.k as i64 - shift;
                let q = t.j as i64 + (n as i64) * t.l as i64;
                debug_assert!(p + q >= 0);
                let power = Complex64::from_polar(r.powi((p + q) as i32), (p - q) as f64 * theta);
                let expo =
                    (uu * t.i as f64 + uu.conj() * t.j as f64 + vv * t.k as f64 + vv.conj() * t.l as f64 + tail).exp();
                acc += t.c * power * expo * kappa.powi((t.k + t.l) as i32);
            }
            values.push(acc);
        }
    }
    ComplexField::from_values(grid, values).expect("sizes match")
}

/// Coefficient values `a(z, w)`, `b(z, w)` at the nodes, with the same clamp as the solver.
fn pointwise_coefficients(
    coeffs: &CoefficientPair,
    z: &ComplexField,
    w: &ComplexField,
) -> (ComplexField, ComplexField) {
    let clamp = |w: Complex64| w * coeffs.clamp_factor(w.norm());
    (z.zip_map(w, |z, w| coeffs.a(z, clamp(w))), z.zip_map(w, |z, w| coeffs.b(z, clamp(w))))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Working exponent; when absent the smallest feasible candidate is chosen.
    pub p: Option<f64>,
    pub p_candidates: Vec<f64>,
    /// Vanishing order of `w` at the origin.
    pub n: u32,
    pub n_radial: usize,
    pub n_angular: usize,
    pub tol_h: f64,
    pub tol_outer: f64,
    pub max_inner: usize,
    pub max_outer: usize,
    pub damping: f64,
    /// Multiplier applied to the probed `‖R0‖_p` before it is used as a bound.
    pub safety: f64,
    pub norm_trials: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            p: None,
            p_candidates: vec![2.25, 2.5, 3.0, 4.0],
            n: 8,
            n_radial: 64,
            n_angular: 256,
            tol_h: 1e-12,
            tol_outer: 1e-10,
            max_inner: 200,
            max_outer: 200,
            damping: 0.5,
            safety: 1.05,
            norm_trials: 16,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if let Some(p) = self.p {
            if !(p > 2.0 && p.is_finite()) {
                return bad(format!("p must be a finite exponent > 2, got {p}"));
            }
        } else if self.p_candidates.is_empty() {
            return bad("p_candidates must be nonempty".into());
        }
        if let Some(p) = self.p_candidates.iter().find(|p| !(**p > 2.0 && p.is_finite())) {
            return bad(format!("candidate exponents must exceed 2, got {p}"));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return bad(format!("damping must lie in (0, 1], got {}", self.damping));
        }
        if !(self.tol_h > 0.0 && self.tol_outer > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if self.max_inner == 0 || self.max_outer == 0 {
            return bad("iteration caps must be positive".into());
        }
        if !(self.safety >= 1.0 && self.safety.is_finite()) {
            return bad(format!("safety factor must be ≥ 1, got {}", self.safety));
        }
        if self.norm_trials == 0 {
            return bad("norm_trials must be positive".into());
        }
        Ok(())
    }

    /// `δ = n^{-1/p}`.
    pub fn delta(&self, p: f64) -> f64 {
        (self.n as f64).powf(-1.0 / p)
    }
}

/// Smallest candidate `p` with `a0 · safety · ‖R0‖_p < 1`, with its probed norm.
pub fn select_exponent(
    grid: &Arc<DiscGrid>,
    coeffs: &CoefficientPair,
    candidates: &[f64],
    safety: f64,
    trials: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if candidates.is_empty() {
        return Err(Error::Config("candidate exponent list is empty".into()));
    }
    if let Some(p) = candidates.iter().find(|p| !(**p > 2.0)) {
        return Err(Error::Config(format!("candidate exponents must exceed 2, got {p}")));
    }
    let mut products = Vec::new();
    for &p in candidates {
        let est = estimate_norm(grid, OperatorId::R0, p, trials, seed)?.estimate;
        let product = coeffs.a0() * safety * est;
        if product < 1.0 {
            return Ok((p, est));
        }
        products.push((p, product));
    }
    Err(Error::Infeasible { products })
}

/// Result of one inner solve.
#[derive(Clone, Debug)]
pub struct InnerSolve {
    pub h: ComplexField,
    pub iterations: usize,
    /// Largest ratio of successive iterate distances above the noise floor.
    pub max_ratio: f64,
    /// `‖A‖_p` for the bound `‖h‖_p ≤ ‖A‖_p / (1 − a0 ‖R0‖_p)`.
    pub a_norm: f64,
    pub h_norm: f64,
}

/// Successive distances below this are treated as converged noise for ratio tracking.
const RATIO_FLOOR: f64 = 1e-11;

/// Fixed point of `h ↦ A (1 + ζ̄ conj(R0 h))` for frozen `u`, `v`.
#[allow(clippy::too_many_arguments)]
pub fn solve_h(
    u: &ComplexField,
    v: &ComplexField,
    coeffs: &CoefficientPair,
    n: u32,
    p: f64,
    tol_h: f64,
    max_inner: usize,
    warm_start: Option<&ComplexField>,
) -> Result<InnerSolve> {
    let a_field = coefficient_field(coeffs, Which::A, u, v, n);
    let a_norm = norm(&a_field, p)?;
    let mut h = warm_start.cloned().unwrap_or_else(|| ComplexField::zeros(u.grid()));
    let mut prev_dist: Option<f64> = None;
    let mut max_ratio: f64 = 0.0;
    let mut last_ratio = f64::NAN;
    let mut history = Vec::new();
    for it in 1..=max_inner {
        let next = &a_field * &one_plus_reflected(&h);
        let dist = norm(&(&next - &h), p)?;
        history.push(dist);
        if let Some(pd) = prev_dist {
            if pd > RATIO_FLOOR && dist > RATIO_FLOOR {
                last_ratio = dist / pd;
                max_ratio = max_ratio.max(last_ratio);
            }
        }
        h = next;
        if !h.is_finite() {
            return Err(Error::NonConvergence {
                stage: "inner h iteration",
                iterations: it,
                last_ratio,
                last_change: dist,
                history,
            });
        }
        if dist < tol_h {
            let h_norm = norm(&h, p)?;
            return Ok(InnerSolve { h, iterations: it, max_ratio, a_norm, h_norm });
        }
        prev_dist = Some(dist);
    }
    Err(Error::NonConvergence {
        stage: "inner h iteration",
        iterations: max_inner,
        last_ratio,
        last_change: *history.last().unwrap_or(&f64::NAN),
        history,
    })
}

/// `1 + ζ̄ conj(R0 h)`, which equals `e^{-ū} ∂z̄/∂ζ̄` for `z = ζ e^u`.
fn one_plus_reflected(h: &ComplexField) -> ComplexField {
    r0(h).map_with_point(|zeta, rh| Complex64::new(1.0, 0.0) + zeta.conj() * rh.conj())
}

/// The assembled disc and its provenance.
#[derive(Clone, Debug)]
pub struct DiscSolution {
    pub u: ComplexField,
    pub v: ComplexField,
    pub h: ComplexField,
    pub z: ComplexField,
    pub w: ComplexField,
    pub n: u32,
}

impl DiscSolution {
    /// `z = ζ e^u`, `w = ζ^n e^v`.
    pub fn assemble(u: ComplexField, v: ComplexField, h: ComplexField, n: u32) -> Self {
        let z = u.map_with_point(|zeta, u| zeta * u.exp());
        let w = v.map_with_point(|zeta, v| zeta.powu(n) * v.exp());
        Self { u, v, h, z, w, n }
    }

    /// The exact solution `(ζ, ζ^n)` of the system with zero coefficients.
    pub fn trivial(grid: &Arc<DiscGrid>, n: u32) -> Self {
        let zero = ComplexField::zeros(grid);
        Self::assemble(zero.clone(), zero.clone(), zero, n)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualRecord {
    /// `max |∂z/∂ζ̄ − a(z,w) conj(∂z/∂ζ)|` over interior nodes.
    pub pde_z: f64,
    /// `max |∂w/∂ζ̄ − b(z,w) conj(∂z/∂ζ)|` over interior nodes.
    pub pde_w: f64,
    pub boundary_z: f64,
    pub boundary_w: f64,
}

impl ResidualRecord {
    pub fn pde(&self) -> f64 {
        self.pde_z.max(self.pde_w)
    }

    pub fn boundary(&self) -> f64 {
        self.boundary_z.max(self.boundary_w)
    }
}

pub fn residual(sol: &DiscSolution, coeffs: &CoefficientPair) -> ResidualRecord {
    let dz_z = dz(&sol.z);
    let (a, b) = pointwise_coefficients(coeffs, &sol.z, &sol.w);
    let rhs_conj = dz_z.conj();
    let res_z = &dbar(&sol.z) - &(&a * &rhs_conj);
    let res_w = &dbar(&sol.w) - &(&b * &rhs_conj);
    let boundary =
        |f: &ComplexField| f.boundary_trace().values.iter().map(|v| (v.norm() - 1.0).abs()).fold(0.0, f64::max);
    ResidualRecord {
        pde_z: res_z.interior_sup(),
        pde_w: res_w.interior_sup(),
        boundary_z: boundary(&sol.z),
        boundary_w: boundary(&sol.w),
    }
}

/// Degree of a closed curve about the origin, by summing wrapped phase increments.
pub fn winding_number(trace: &BoundaryTrace) -> Result<i64> {
    if trace.is_empty() {
        return Err(Error::Degenerate("empty boundary trace".into()));
    }
    let min = trace.values.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    if !(min > 1e-12) {
        return Err(Error::Degenerate(format!("curve passes within {min:.3e} of the origin")));
    }
    let n = trace.len();
    let total: f64 = (0..n)
        .map(|i| {
            let a = trace.values[i];
            let b = trace.values[(i + 1) % n];
            (b / a).arg()
        })
        .sum();
    Ok((total / (2.0 * PI)).round() as i64)
}

/// Minimum of `|∂z/∂ζ|² − |∂z/∂ζ̄|²` over all nodes, and whether it is positive.
pub fn jacobian_check(sol: &DiscSolution) -> (f64, bool) {
    let jac = dz(&sol.z).zip_map(&dbar(&sol.z), |a, b| Complex64::new(a.norm_sqr() - b.norm_sqr(), 0.0));
    let min = jac.values().iter().map(|v| v.re).fold(f64::INFINITY, f64::min);
    (min, min > 0.0)
}

/// Smallest `C` with `|w(ζ)| ≤ C |ζ|^n` on the grid, i.e. `max |e^v|`.
pub fn envelope_constant(sol: &DiscSolution) -> f64 {
    sol.v.values().iter().map(|v| v.re.exp()).fold(0.0, f64::max)
}

/// Distance of the boundary curve `(z, w)` to the torus `|z| = |w| = 1`.
pub fn torus_distance(sol: &DiscSolution) -> f64 {
    let z = sol.z.boundary_trace();
    let w = sol.w.boundary_trace();
    z.values.iter().zip(&w.values).map(|(a, b)| (a.norm() - 1.0).abs().max((b.norm() - 1.0).abs())).fold(0.0, f64::max)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationHistory {
    pub sup_u: Vec<f64>,
    pub sup_v: Vec<f64>,
    pub h_norm_p: Vec<f64>,
    /// `max(‖U − u‖_∞, ‖V − v‖_∞)` before damping.
    pub change: Vec<f64>,
    pub inner_iters: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub converged: bool,
    pub n: u32,
    pub p: f64,
    pub delta: f64,
    pub a0: f64,
    pub r0_norm_estimate: f64,
    /// `a0 · ‖R0‖_p(est)`: the contraction bound for the inner iteration.
    pub contraction_bound: f64,
    pub max_inner_ratio: f64,
    /// Whether every inner solve satisfied `‖h‖_p ≤ ‖A‖_p/(1 − a0·safety·‖R0‖_p) + tol_h`.
    pub h_bound_ok: bool,
    pub outer_iters: usize,
    pub inner_iters_total: usize,
    pub history: IterationHistory,
    pub residuals: ResidualRecord,
    pub winding_z: i64,
    pub min_jacobian: f64,
    pub orientation_ok: bool,
    pub envelope_c: f64,
    pub sup_w: f64,
    pub torus_distance: f64,
    pub max_boundary_re_uv: f64,
}

/// Damped Picard iteration for the boundary problem.
pub struct BeltramiSolver {
    coeffs: CoefficientPair,
    config: SolverConfig,
    grid: Arc<DiscGrid>,
}

impl BeltramiSolver {
    pub fn new(coeffs: CoefficientPair, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let grid = build_grid(config.n_radial, config.n_angular)?;
        Ok(Self { coeffs, config, grid })
    }

    pub fn with_grid(coeffs: CoefficientPair, config: SolverConfig, grid: Arc<DiscGrid>) -> Result<Self> {
        config.validate()?;
        if grid.n_radial() != config.n_radial || grid.n_angular() != config.n_angular {
            return Err(Error::Usage("grid does not match the solver configuration".into()));
        }
        Ok(Self { coeffs, config, grid })
    }

    pub fn grid(&self) -> &Arc<DiscGrid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &CoefficientPair {
        &self.coeffs
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// Working exponent and probed `‖R0‖_p`, checking feasibility.
    pub fn exponent(&self) -> Result<(f64, f64)> {
        let cfg = &self.config;
        match cfg.p {
            Some(p) => select_exponent(&self.grid, &self.coeffs, &[p], cfg.safety, cfg.norm_trials, cfg.seed),
            None => select_exponent(&self.grid, &self.coeffs, &cfg.p_candidates, cfg.safety, cfg.norm_trials, cfg.seed),
        }
    }

    pub fn outer_iterate(&self) -> Result<(DiscSolution, SolveReport)> {
        let cfg = &self.config;
        let (p, r0_est) = self.exponent()?;
        let n = cfg.n;
        let working = self.coeffs.a0() * cfg.safety * r0_est;

        let mut u = ComplexField::zeros(&self.grid);
        let mut v = ComplexField::zeros(&self.grid);
        let mut h_prev: Option<ComplexField> = None;
        let mut history = IterationHistory::default();
        let mut max_ratio: f64 = 0.0;
        let mut inner_total = 0;
        let mut h_bound_ok = true;

        for it in 1..=cfg.max_outer {
            let inner = solve_h(&u, &v, &self.coeffs, n, p, cfg.tol_h, cfg.max_inner, h_prev.as_ref())?;
            inner_total += inner.iterations;
            max_ratio = max_ratio.max(inner.max_ratio);
            if inner.h_norm > inner.a_norm / (1.0 - working) + cfg.tol_h {
                h_bound_ok = false;
            }
            let reflected = one_plus_reflected(&inner.h);
            let big_u = t0(&inner.h);
            let b_field = coefficient_field(&self.coeffs, Which::B, &u, &v, n);
            let big_v = t0(&(&b_field * &reflected));
            let change = (&big_u - &u).sup().max((&big_v - &v).sup());

            history.change.push(change);
            history.h_norm_p.push(inner.h_norm);
            history.inner_iters.push(inner.iterations);

            if !change.is_finite() {
                return Err(self.diverged(it, change, history));
            }
            if change < cfg.tol_outer {
                history.sup_u.push(big_u.sup());
                history.sup_v.push(big_v.sup());
                let sol = DiscSolution::assemble(big_u, big_v, inner.h, n);
                let report = self.report(&sol, p, r0_est, max_ratio, h_bound_ok, it, inner_total, history);
                return Ok((sol, report));
            }
            let d = cfg.damping;
            u = u.zip_map(&big_u, |old, new| old * (1.0 - d) + new * d);
            v = v.zip_map(&big_v, |old, new| old * (1.0 - d) + new * d);
            history.sup_u.push(u.sup());
            history.sup_v.push(v.sup());
            h_prev = Some(inner.h);
        }
        let last = *history.change.last().unwrap_or(&f64::NAN);
        Err(self.diverged(cfg.max_outer, last, history))
    }

    fn diverged(&self, iterations: usize, last_change: f64, history: IterationHistory) -> Error {
        let ch = &history.change;
        let last_ratio = if ch.len() >= 2 { ch[ch.len() - 1] / ch[ch.len() - 2] } else { f64::NAN };
        Error::NonConvergence {
            stage: "outer (u, v) iteration",
            iterations,
            last_ratio,
            last_change,
            history: history.change,
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn report(
        &self,
        sol: &DiscSolution,
        p: f64,
        r0_est: f64,
        max_ratio: f64,
        h_bound_ok: bool,
        outer_iters: usize,
        inner_total: usize,
        history: IterationHistory,
    ) -> SolveReport {
        let residuals = residual(sol, &self.coeffs);
        let (min_jacobian, orientation_ok) = jacobian_check(sol);
        let re_bdry = |f: &ComplexField| f.boundary_trace().values.iter().map(|v| v.re.abs()).fold(0.0, f64::max);
        SolveReport {
            converged: true,
            n: sol.n,
            p,
            delta: self.config.delta(p),
            a0: self.coeffs.a0(),
            r0_norm_estimate: r0_est,
            contraction_bound: self.coeffs.a0() * r0_est,
            max_inner_ratio: max_ratio,
            h_bound_ok,
            outer_iters,
            inner_iters_total: inner_total,
            history,
            residuals,
            winding_z: winding_number(&sol.z.boundary_trace()).unwrap_or(0),
            min_jacobian,
            orientation_ok,
            envelope_c: envelope_constant(sol),
            sup_w: sol.w.sup(),
            torus_distance: torus_distance(sol),
            max_boundary_re_uv: re_bdry(&sol.u).max(re_bdry(&sol.v)),
        }
    }
}
