//! Integral operators on the unit disc.
//!
//! All kernels use `dτ∧dτ̄ = −2i dA`, so
//!
//! * `T f(ζ) = (1/π) ∬ f(τ)/(ζ − τ) dA` (Cauchy-Green, `∂_ζ̄ T f = f`, `T 1 = ζ̄`),
//! * `R f = ∂_ζ T f` (Ahlfors-Beurling; never evaluated as a principal value here),
//! * `B f(ζ) = −(1/π) ∬ f(τ)/(τ̄ζ − 1)² dA`, the negative of the classical Bergman
//!   projection (`B 1 = −1`),
//! * `T0 f(ζ) = T f(ζ) − conj(T f(1/ζ̄))`, with `Re T0 f = 0` on the unit circle,
//! * `R0 f = R f + B f̄ = ∂_ζ T0 f`, an `ℝ`-linear isometry of `L²(D)`.
//!
//! Every operator acts mode by mode on the angular Fourier expansion. For
//! `f = f_m(r) e^{imθ}` the Cauchy-Green transform lands in mode `m − 1` with profile
//!
//! ```text
//! m ≤ 0:  g(r) =  2 ∫_0^r f_m(s) (s/r)^{1−m} ds
//! m ≥ 1:  g(r) = −2 ∫_r^1 f_m(s) (r/s)^{m−1} ds
//! ```
//!
//! and outside the disc `T f = Σ_{m≤0} g_m(1) ζ^{m−1}`, which gives the reflection
//! term of `T0` in closed form.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::discfield::{dz, norm, ComplexField, DiscGrid, Spectrum};
use crate::quadrature::{gauss_legendre, interpolation_row};
use crate::{Error, Result};

/// Per-mode radial matrices of the Cauchy-Green transform, indexed by FFT bin.
pub(crate) struct CauchyKernels {
    mats: Vec<Vec<f64>>,
}

impl CauchyKernels {
    fn build(grid: &DiscGrid) -> Self {
        let nr = grid.n_radial();
        let r = grid.radial_nodes();
        let bary = grid.barycentric();
        // exact for kernel degree up to the largest resolved mode
        let q = (nr + grid.n_angular() / 2) / 2 + 8;
        let (x, w) = gauss_legendre(q, 0.0, 1.0);

        // interpolation rows at sub-quadrature points on [0, r_i] and [r_i, 1]
        let mut inner_pts = Vec::with_capacity(nr);
        let mut outer_pts = Vec::with_capacity(nr);
        for &ri in r {
            let inner: Vec<(f64, f64, Vec<f64>)> = x
                .iter()
                .zip(&w)
                .map(|(&t, &wt)| {
                    let s = ri * t;
                    (s, ri * wt, interpolation_row(r, bary, s))
                })
                .collect();
            let outer: Vec<(f64, f64, Vec<f64>)> = x
                .iter()
                .zip(&w)
                .map(|(&t, &wt)| {
                    let s = ri + (1.0 - ri) * t;
                    (s, (1.0 - ri) * wt, interpolation_row(r, bary, s))
                })
                .collect();
            inner_pts.push(inner);
            outer_pts.push(outer);
        }

        let mats = (0..grid.n_angular())
            .map(|k| {
                let m = grid.mode_of(k);
                let mut mat = vec![0.0; nr * nr];
                for i in 0..nr {
                    let row = &mut mat[i * nr..(i + 1) * nr];
                    if m <= 0 {
                        let e = (1 - m) as i32;
                        for (s, wq, interp) in &inner_pts[i] {
                            let kern = 2.0 * wq * (s / r[i]).powi(e);
                            for (acc, l) in row.iter_mut().zip(interp) {
                                *acc += kern * l;
                            }
                        }
                    } else {
                        let e = (m - 1) as i32;
                        for (s, wq, interp) in &outer_pts[i] {
                            let kern = -2.0 * wq * (r[i] / s).powi(e);
                            for (acc, l) in row.iter_mut().zip(interp) {
                                *acc += kern * l;
                            }
                        }
                    }
                }
                mat
            })
            .collect();
        Self { mats }
    }

    fn apply(&self, k: usize, nr: usize, profile: &[Complex64]) -> Vec<Complex64> {
        let mat = &self.mats[k];
        (0..nr).map(|i| mat[i * nr..(i + 1) * nr].iter().zip(profile).map(|(a, v)| v * a).sum()).collect()
    }
}

fn kernels(grid: &DiscGrid) -> &CauchyKernels {
    grid.cauchy_kernels.get_or_init(|| CauchyKernels::build(grid))
}

/// Spectrum of `T f` together with the exterior coefficients `c_m = g_m(1)`, `m ≤ 0`.
fn cauchy_green_spectral(spec: &Spectrum) -> (Spectrum, Vec<(i64, Complex64)>) {
    let grid = spec.grid();
    let nr = grid.n_radial();
    let ker = kernels(grid);
    let mut out = Spectrum::zeros(grid);
    let mut exterior = Vec::new();
    for k in 0..grid.n_angular() {
        let m = grid.mode_of(k);
        if grid.bin_of(m).is_none() {
            continue;
        }
        let Some(target) = grid.bin_of(m - 1) else { continue };
        let g = ker.apply(k, nr, &spec.profile(k));
        if m <= 0 {
            exterior.push((m, g[nr - 1]));
        }
        out.set_profile(target, &g);
    }
    (out, exterior)
}

/// Cauchy-Green transform `T f`.
pub fn cauchy_green(f: &ComplexField) -> ComplexField {
    cauchy_green_spectral(&f.spectrum()).0.to_field()
}

/// Ahlfors-Beurling transform, computed as `∂_ζ T f`.
pub fn ahlfors_beurling(f: &ComplexField) -> ComplexField {
    dz(&cauchy_green(f))
}

/// `B f = −Σ_{k≥0} 2(k+1) ζ^k ∫_0^1 f_k(s) s^{k+1} ds`.
pub fn bergman(f: &ComplexField) -> ComplexField {
    let grid = f.grid();
    let spec = f.spectrum();
    let r = grid.radial_nodes();
    let rw = grid.radial_weights();
    let mut out = Spectrum::zeros(grid);
    for k in 0..grid.n_angular() {
        let m = grid.mode_of(k);
        if m < 0 || grid.bin_of(m).is_none() {
            continue;
        }
        let profile = spec.profile(k);
        let moment: Complex64 =
            profile.iter().zip(r.iter().zip(rw)).map(|(v, (ri, wi))| v * (wi * ri.powi(m as i32))).sum();
        let scale = -2.0 * (m as f64 + 1.0) * moment;
        let g: Vec<Complex64> = r.iter().map(|ri| scale * ri.powi(m as i32)).collect();
        out.set_profile(k, &g);
    }
    out.to_field()
}

/// `T0 f = T f − conj(T f(1/ζ̄))`.
pub fn t0(f: &ComplexField) -> ComplexField {
    let grid = f.grid().clone();
    let (mut spec, exterior) = cauchy_green_spectral(&f.spectrum());
    let r = grid.radial_nodes();
    for (m, c) in exterior {
        // conj(c ζ̄^{1-m}) evaluated inside the disc is conj(c) ζ^{1-m}
        let Some(target) = grid.bin_of(1 - m) else { continue };
        let e = (1 - m) as i32;
        let g: Vec<Complex64> = r.iter().map(|ri| -c.conj() * ri.powi(e)).collect();
        spec.add_profile(target, &g);
    }
    spec.to_field()
}

/// `R0 f = R f + B f̄`.
pub fn r0(f: &ComplexField) -> ComplexField {
    &ahlfors_beurling(f) + &bergman(&f.conj())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OperatorId {
    T,
    R,
    B,
    T0,
    R0,
}

impl OperatorId {
    pub fn apply(self, f: &ComplexField) -> ComplexField {
        match self {
            OperatorId::T => cauchy_green(f),
            OperatorId::R => ahlfors_beurling(f),
            OperatorId::B => bergman(f),
            OperatorId::T0 => t0(f),
            OperatorId::R0 => r0(f),
        }
    }
}

impl std::str::FromStr for OperatorId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "T" => Ok(OperatorId::T),
            "R" => Ok(OperatorId::R),
            "B" => Ok(OperatorId::B),
            "T0" => Ok(OperatorId::T0),
            "R0" => Ok(OperatorId::R0),
            other => Err(Error::Config(format!("unknown operator '{other}'"))),
        }
    }
}

/// Empirical lower bound for an `L^p → L^p` operator norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorNormProfile {
    pub operator_id: OperatorId,
    pub p: f64,
    /// Best ratio `‖Op f‖_p / ‖f‖_p` over the probes.
    pub estimate: f64,
    pub trials: usize,
    /// Hölder exponent `(p − 2)/p`, present when `p > 2`.
    pub alpha: Option<f64>,
}

/// Degree of the random polynomial probes used by [`estimate_norm`].
pub const PROBE_DEGREE: usize = 8;

/// Seeded random polynomial `Σ_{a+b ≤ degree} c_ab ζ^a ζ̄^b` with coefficients
/// uniform in the unit square, damped by `1/(1 + a + b)`.
pub fn random_polynomial_field(grid: &Arc<DiscGrid>, degree: usize, rng: &mut impl Rng) -> ComplexField {
    let mut coeffs = Vec::new();
    for a in 0..=degree {
        for b in 0..=(degree - a) {
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) / (1.0 + (a + b) as f64);
            coeffs.push((a as i32, b as i32, c));
        }
    }
    ComplexField::from_fn(grid, |z| coeffs.iter().map(|&(a, b, c)| c * z.powi(a) * z.conj().powi(b)).sum())
}

/// Seeded random-probe estimate of `‖op‖_{L^p(D) → L^p(D)}`.
pub fn estimate_norm(
    grid: &Arc<DiscGrid>,
    operator_id: OperatorId,
    p: f64,
    trials: usize,
    seed: u64,
) -> Result<OperatorNormProfile> {
    if p.is_nan() || p <= 1.0 || p.is_infinite() {
        return Err(Error::Config(format!("operator norm exponent must be a finite p > 1, got {p}")));
    }
    if trials == 0 {
        return Err(Error::Config("at least one probe trial is required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    for _ in 0..trials {
        let f = random_polynomial_field(grid, PROBE_DEGREE, &mut rng);
        let nf = norm(&f, p)?;
        if nf == 0.0 {
            continue;
        }
        let ratio = norm(&operator_id.apply(&f), p)? / nf;
        best = best.max(ratio);
    }
    Ok(OperatorNormProfile { operator_id, p, estimate: best, trials, alpha: (p > 2.0).then(|| (p - 2.0) / p) })
}
