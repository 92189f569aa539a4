#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use jdisc_core::discfield::{ComplexField, DiscGrid};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `Σ c_ab ζ^a ζ̄^b`, evaluable anywhere so oracles can sample off the grid.
#[derive(Clone, Debug)]
pub struct Poly {
    pub terms: Vec<(u32, u32, Complex64)>,
}

impl Poly {
    pub fn random(degree: u32, rng: &mut impl Rng) -> Self {
        let mut terms = Vec::new();
        for a in 0..=degree {
            for b in 0..=(degree - a) {
                terms.push((a, b, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) / (1.0 + (a + b) as f64)));
            }
        }
        Self { terms }
    }

    pub fn seeded(degree: u32, seed: u64) -> Self {
        Self::random(degree, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn monomial(a: u32, b: u32) -> Self {
        Self { terms: vec![(a, b, c(1.0, 0.0))] }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.terms.iter().map(|&(a, b, k)| k * z.powu(a) * z.conj().powu(b)).sum()
    }

    pub fn field(&self, grid: &Arc<DiscGrid>) -> ComplexField {
        ComplexField::from_fn(grid, |z| self.eval(z))
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|t| t.0 + t.1).max().unwrap_or(0)
    }
}

/// Gauss-Legendre rule on `[0, 1]`, kept separate from the library's own.
pub fn gl01(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut d = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            d = n as f64 * (t * p1 - p0) / (t * t - 1.0);
            let dt = p1 / d;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        x[i] = (1.0 - t) / 2.0;
        w[i] = 1.0 / ((1.0 - t * t) * d * d);
    }
    (x, w)
}

/// Distance from `ζ` to the unit circle along direction `e^{iα}`.
fn rho_max(zeta: Complex64, alpha: f64) -> f64 {
    let b = (zeta.conj() * Complex64::from_polar(1.0, alpha)).re;
    -b + (b * b + 1.0 - zeta.norm_sqr()).sqrt()
}

/// `∫_0^{2π} ∫_0^{ρmax(α)} g(ρ, α) dρ dα`, trapezoid in `α`, Gauss-Legendre in `ρ`.
fn centred_integral(zeta: Complex64, g: impl Fn(f64, f64) -> Complex64) -> Complex64 {
    let (x, w) = gl01(48);
    let na = 512;
    let mut total = c(0.0, 0.0);
    for ia in 0..na {
        let alpha = 2.0 * PI * ia as f64 / na as f64;
        let rm = rho_max(zeta, alpha);
        let mut inner = c(0.0, 0.0);
        for (xi, wi) in x.iter().zip(&w) {
            inner += g(rm * xi, alpha) * (rm * wi);
        }
        total += inner * (2.0 * PI / na as f64);
    }
    total
}

/// `(1/π) ∬_D f(τ)/(ζ − τ) dA(τ)` in polar coordinates centred at `ζ`.
pub fn cauchy_oracle(f: &Poly, zeta: Complex64) -> Complex64 {
    // τ = ζ + ρ e^{iα}: f/(ζ − τ) ρ = −f e^{−iα}
    -centred_integral(zeta, |rho, alpha| {
        f.eval(zeta + Complex64::from_polar(rho, alpha)) * Complex64::from_polar(1.0, -alpha)
    }) / PI
}

/// Principal value `−(1/π) PV ∬_D f(τ)/(τ − ζ)² dA(τ)`, with the singular part
/// integrated in closed form.
pub fn beurling_oracle(f: &Poly, zeta: Complex64) -> Complex64 {
    let f0 = f.eval(zeta);
    let regular = centred_integral(zeta, |rho, alpha| {
        if rho == 0.0 {
            return c(0.0, 0.0);
        }
        (f.eval(zeta + Complex64::from_polar(rho, alpha)) - f0) * Complex64::from_polar(1.0 / rho, -2.0 * alpha)
    });
    let na = 4096;
    let mut log_part = c(0.0, 0.0);
    for ia in 0..na {
        let alpha = 2.0 * PI * ia as f64 / na as f64;
        log_part += Complex64::from_polar(rho_max(zeta, alpha).ln(), -2.0 * alpha) * (2.0 * PI / na as f64);
    }
    -(regular + f0 * log_part) / PI
}

/// `−(1/π) ∬_D f(τ)/(τ̄ζ − 1)² dA(τ)` over polar coordinates at the origin.
pub fn bergman_oracle(f: &Poly, zeta: Complex64) -> Complex64 {
    let (x, w) = gl01(64);
    let na = 256;
    let mut total = c(0.0, 0.0);
    for ia in 0..na {
        let th = 2.0 * PI * ia as f64 / na as f64;
        for (r, wr) in x.iter().zip(&w) {
            let tau = Complex64::from_polar(*r, th);
            let k = tau.conj() * zeta - 1.0;
            total += f.eval(tau) / (k * k) * (r * wr * 2.0 * PI / na as f64);
        }
    }
    -total / PI
}

/// Up to `count` grid nodes with `r ≤ rmax`, spread over rings and angles.
pub fn probe_nodes(grid: &DiscGrid, rmax: f64, count: usize) -> Vec<(usize, Complex64)> {
    let rings: Vec<usize> = (0..grid.n_radial()).filter(|&i| grid.radial_nodes()[i] <= rmax).collect();
    let mut out = Vec::new();
    for k in 0..count {
        let ir = rings[(k * 7) % rings.len()];
        let ia = (k * 13 + 3) % grid.n_angular();
        out.push((ir * grid.n_angular() + ia, grid.point(ir, ia)));
    }
    out
}

/// Off-grid value of a band-limited field: trigonometric interpolation on each ring,
/// then Lagrange interpolation through the ring radii.
pub fn interpolate(f: &ComplexField, zeta: Complex64) -> Complex64 {
    let grid = f.grid();
    let na = grid.n_angular();
    let (r, theta) = (zeta.norm(), zeta.arg());
    let ring_values: Vec<Complex64> = (0..grid.n_radial())
        .map(|ir| {
            let ring = f.ring(ir);
            let mut acc = c(0.0, 0.0);
            for m in -(na as i64 / 2 - 1)..(na as i64 / 2) {
                let coeff: Complex64 = ring
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v * Complex64::from_polar(1.0, -(m as f64) * 2.0 * PI * j as f64 / na as f64))
                    .sum::<Complex64>()
                    / na as f64;
                acc += coeff * Complex64::from_polar(1.0, m as f64 * theta);
            }
            acc
        })
        .collect();
    let nodes = grid.radial_nodes();
    let mut total = c(0.0, 0.0);
    for (i, xi) in nodes.iter().enumerate() {
        let mut l = 1.0;
        for (j, xj) in nodes.iter().enumerate() {
            if i != j {
                l *= (r - xj) / (xi - xj);
            }
        }
        total += ring_values[i] * l;
    }
    total
}

/// `(∂f/∂ζ, ∂f/∂ζ̄)` at an interior point by central differences of [`interpolate`].
pub fn wirtinger_fd(f: &ComplexField, zeta: Complex64, h: f64) -> (Complex64, Complex64) {
    let fx = (interpolate(f, zeta + h) - interpolate(f, zeta - h)) / (2.0 * h);
    let fy = (interpolate(f, zeta + c(0.0, h)) - interpolate(f, zeta - c(0.0, h))) / (2.0 * h);
    let i = c(0.0, 1.0);
    ((fx - i * fy) / 2.0, (fx + i * fy) / 2.0)
}
