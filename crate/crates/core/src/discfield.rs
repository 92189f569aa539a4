//! Polar discretization of the closed unit disc.
//!
//! A [`DiscGrid`] is a tensor grid: `n_radial` rings (Gauss-Legendre radii in
//! `(0,1)` plus one ring exactly on `|ζ| = 1`) times `n_angular` equispaced angles.
//! Fields are stored as samples at the nodes; calculus is done per angular Fourier
//! mode, with each mode's radial profile represented by its interpolating polynomial
//! through the ring radii.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::quadrature::{barycentric_weights, differentiation_matrix, gauss_legendre};
use crate::{Error, Result};

pub struct DiscGrid {
    n_radial: usize,
    n_angular: usize,
    radial_nodes: Vec<f64>,
    /// Weights for `∫_0^1 g(r) r dr`; zero on the boundary ring.
    radial_weights: Vec<f64>,
    quad_weights: Vec<f64>,
    angles: Vec<f64>,
    bary: Vec<f64>,
    diff: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    pub(crate) cauchy_kernels: OnceLock<crate::transforms::CauchyKernels>,
}

impl fmt::Debug for DiscGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiscGrid").field("n_radial", &self.n_radial).field("n_angular", &self.n_angular).finish()
    }
}

impl PartialEq for DiscGrid {
    fn eq(&self, other: &Self) -> bool {
        // construction is deterministic in the two counts
        self.n_radial == other.n_radial && self.n_angular == other.n_angular
    }
}

/// Build a grid with `n_radial` rings (the last on `|ζ| = 1`) and `n_angular` angles.
pub fn build_grid(n_radial: usize, n_angular: usize) -> Result<Arc<DiscGrid>> {
    DiscGrid::new(n_radial, n_angular).map(Arc::new)
}

impl DiscGrid {
    pub fn new(n_radial: usize, n_angular: usize) -> Result<Self> {
        if n_radial < 4 {
            return Err(Error::Config(format!("n_radial must be at least 4, got {n_radial}")));
        }
        if n_angular < 8 || !n_angular.is_multiple_of(2) {
            return Err(Error::Config(format!("n_angular must be even and at least 8, got {n_angular}")));
        }
        let (mut radial_nodes, gl_weights) = gauss_legendre(n_radial - 1, 0.0, 1.0);
        let mut radial_weights: Vec<f64> = radial_nodes.iter().zip(&gl_weights).map(|(r, w)| r * w).collect();
        radial_nodes.push(1.0);
        radial_weights.push(0.0);

        let dtheta = 2.0 * PI / n_angular as f64;
        let angles = (0..n_angular).map(|j| j as f64 * dtheta).collect();
        let quad_weights = radial_weights.iter().flat_map(|w| std::iter::repeat_n(w * dtheta, n_angular)).collect();

        let bary = barycentric_weights(&radial_nodes);
        let diff = differentiation_matrix(&radial_nodes, &bary);
        let mut planner = FftPlanner::new();
        Ok(Self {
            n_radial,
            n_angular,
            radial_nodes,
            radial_weights,
            quad_weights,
            angles,
            bary,
            diff,
            forward: planner.plan_fft_forward(n_angular),
            inverse: planner.plan_fft_inverse(n_angular),
            cauchy_kernels: OnceLock::new(),
        })
    }

    pub fn n_radial(&self) -> usize {
        self.n_radial
    }

    pub fn n_angular(&self) -> usize {
        self.n_angular
    }

    pub fn len(&self) -> usize {
        self.n_radial * self.n_angular
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn radial_nodes(&self) -> &[f64] {
        &self.radial_nodes
    }

    pub fn radial_weights(&self) -> &[f64] {
        &self.radial_weights
    }

    /// Area weight of every node, ring-major; sums to π.
    pub fn quad_weights(&self) -> &[f64] {
        &self.quad_weights
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub(crate) fn barycentric(&self) -> &[f64] {
        &self.bary
    }

    /// Node `ζ` for ring `i`, angle `j`.
    pub fn point(&self, i: usize, j: usize) -> Complex64 {
        Complex64::from_polar(self.radial_nodes[i], self.angles[j])
    }

    pub fn points(&self) -> impl Iterator<Item = Complex64> + '_ {
        (0..self.n_radial).flat_map(move |i| (0..self.n_angular).map(move |j| self.point(i, j)))
    }

    /// Index of the boundary ring.
    pub fn boundary_ring(&self) -> usize {
        self.n_radial - 1
    }

    /// Signed Fourier mode carried by FFT bin `k`; the Nyquist bin maps to `-N/2`.
    pub fn mode_of(&self, k: usize) -> i64 {
        let n = self.n_angular as i64;
        let k = k as i64;
        if k < n / 2 {
            k
        } else {
            k - n
        }
    }

    /// FFT bin of mode `m`, if `m` lies in the resolved band `|m| < N/2`.
    pub fn bin_of(&self, m: i64) -> Option<usize> {
        let n = self.n_angular as i64;
        if m.abs() >= n / 2 {
            None
        } else if m >= 0 {
            Some(m as usize)
        } else {
            Some((m + n) as usize)
        }
    }

    /// Apply the radial differentiation matrix to one mode profile.
    pub(crate) fn radial_derivative(&self, g: &[Complex64]) -> Vec<Complex64> {
        let n = self.n_radial;
        (0..n)
            .map(|i| {
                let row = &self.diff[i * n..(i + 1) * n];
                row.iter().zip(g).map(|(d, v)| v * d).sum()
            })
            .collect()
    }
}

/// Per-ring angular Fourier coefficients of a field: `f(r_i, θ) = Σ_m c[i][m] e^{imθ}`.
#[derive(Clone, Debug)]
pub struct Spectrum {
    grid: Arc<DiscGrid>,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn zeros(grid: &Arc<DiscGrid>) -> Self {
        Self { grid: grid.clone(), coeffs: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn grid(&self) -> &Arc<DiscGrid> {
        &self.grid
    }

    /// Radial profile of FFT bin `k`.
    pub fn profile(&self, k: usize) -> Vec<Complex64> {
        let n = self.grid.n_angular;
        (0..self.grid.n_radial).map(|i| self.coeffs[i * n + k]).collect()
    }

    pub fn set_profile(&mut self, k: usize, profile: &[Complex64]) {
        let n = self.grid.n_angular;
        for (i, v) in profile.iter().enumerate() {
            self.coeffs[i * n + k] = *v;
        }
    }

    pub fn add_profile(&mut self, k: usize, profile: &[Complex64]) {
        let n = self.grid.n_angular;
        for (i, v) in profile.iter().enumerate() {
            self.coeffs[i * n + k] += *v;
        }
    }

    pub fn coeff(&self, ring: usize, k: usize) -> Complex64 {
        self.coeffs[ring * self.grid.n_angular + k]
    }

    pub fn to_field(&self) -> ComplexField {
        let n = self.grid.n_angular;
        let mut values = self.coeffs.clone();
        for ring in values.chunks_mut(n) {
            self.grid.inverse.process(ring);
        }
        ComplexField { grid: self.grid.clone(), values }
    }
}

/// Complex samples at every node of a [`DiscGrid`], ring-major.
#[derive(Clone, Debug)]
pub struct ComplexField {
    grid: Arc<DiscGrid>,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn zeros(grid: &Arc<DiscGrid>) -> Self {
        Self::constant(grid, Complex64::new(0.0, 0.0))
    }

    pub fn constant(grid: &Arc<DiscGrid>, c: Complex64) -> Self {
        Self { grid: grid.clone(), values: vec![c; grid.len()] }
    }

    pub fn from_fn(grid: &Arc<DiscGrid>, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self { grid: grid.clone(), values: grid.points().map(f).collect() }
    }

    pub fn from_values(grid: &Arc<DiscGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Usage(format!("expected {} samples, got {}", grid.len(), values.len())));
        }
        Ok(Self { grid: grid.clone(), values })
    }

    pub fn grid(&self) -> &Arc<DiscGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn at(&self, ring: usize, angle: usize) -> Complex64 {
        self.values[ring * self.grid.n_angular + angle]
    }

    pub fn ring(&self, ring: usize) -> &[Complex64] {
        let n = self.grid.n_angular;
        &self.values[ring * n..(ring + 1) * n]
    }

    pub fn same_grid(&self, other: &ComplexField) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Pointwise map with access to the node position.
    pub fn map_with_point(&self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        let values = self.grid.points().zip(&self.values).map(|(z, &v)| f(z, v)).collect();
        Self { grid: self.grid.clone(), values }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert!(self.same_grid(other), "fields live on different grids");
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self { grid: self.grid.clone(), values }
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }

    pub fn spectrum(&self) -> Spectrum {
        let n = self.grid.n_angular;
        let inv = 1.0 / n as f64;
        let mut coeffs = self.values.clone();
        for ring in coeffs.chunks_mut(n) {
            self.grid.forward.process(ring);
            for c in ring.iter_mut() {
                *c *= inv;
            }
        }
        Spectrum { grid: self.grid.clone(), coeffs }
    }

    pub fn boundary_trace(&self) -> BoundaryTrace {
        BoundaryTrace { values: self.ring(self.grid.boundary_ring()).to_vec() }
    }

    /// Largest modulus over all nodes.
    pub fn sup(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest modulus over the interior rings `|ζ| < 1`.
    pub fn interior_sup(&self) -> f64 {
        let n = self.grid.n_angular;
        self.values[..self.grid.boundary_ring() * n].iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// CSV dump: header `r,theta,re,im`, ring-major, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "r,theta,re,im")?;
        for i in 0..self.grid.n_radial {
            for j in 0..self.grid.n_angular {
                let v = self.at(i, j);
                writeln!(
                    out,
                    "{:.16e},{:.16e},{:.16e},{:.16e}",
                    self.grid.radial_nodes[i], self.grid.angles[j], v.re, v.im
                )?;
            }
        }
        Ok(())
    }
}

impl Add for &ComplexField {
    type Output = ComplexField;
    fn add(self, rhs: Self) -> ComplexField {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &ComplexField {
    type Output = ComplexField;
    fn sub(self, rhs: Self) -> ComplexField {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul for &ComplexField {
    type Output = ComplexField;
    fn mul(self, rhs: Self) -> ComplexField {
        self.zip_map(rhs, |a, b| a * b)
    }
}

impl Neg for &ComplexField {
    type Output = ComplexField;
    fn neg(self) -> ComplexField {
        self.map(|v| -v)
    }
}

/// Samples of a field on the boundary ring `|ζ| = 1`, one per angular node.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryTrace {
    pub values: Vec<Complex64>,
}

impl BoundaryTrace {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Shift every resolved mode `m` to `m + shift`, applying `op(m, profile, derivative)`.
fn mode_shift_derivative(
    f: &ComplexField,
    shift: i64,
    op: impl Fn(i64, &[f64], &[Complex64], &[Complex64]) -> Vec<Complex64>,
) -> ComplexField {
    let grid = f.grid();
    let spec = f.spectrum();
    let mut out = Spectrum::zeros(grid);
    for k in 0..grid.n_angular {
        let m = grid.mode_of(k);
        let Some(target) = grid.bin_of(m + shift) else { continue };
        if grid.bin_of(m).is_none() {
            continue;
        }
        let g = spec.profile(k);
        let dg = grid.radial_derivative(&g);
        out.set_profile(target, &op(m, &grid.radial_nodes, &g, &dg));
    }
    out.to_field()
}

/// `∂f/∂ζ̄ = ½(∂_x + i∂_y) f`; mode `m` maps to mode `m+1` with profile `½(g' − m g / r)`.
pub fn dbar(f: &ComplexField) -> ComplexField {
    mode_shift_derivative(f, 1, |m, r, g, dg| (0..r.len()).map(|i| 0.5 * (dg[i] - g[i] * (m as f64 / r[i]))).collect())
}

/// `∂f/∂ζ = ½(∂_x − i∂_y) f`; mode `m` maps to mode `m−1` with profile `½(g' + m g / r)`.
pub fn dz(f: &ComplexField) -> ComplexField {
    mode_shift_derivative(f, -1, |m, r, g, dg| (0..r.len()).map(|i| 0.5 * (dg[i] + g[i] * (m as f64 / r[i]))).collect())
}

/// Quadrature `L^p` norm over the disc; `p = f64::INFINITY` gives the sample maximum.
pub fn norm(f: &ComplexField, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::Config(format!("norm exponent must be in [1, ∞], got {p}")));
    }
    if p.is_infinite() {
        return Ok(f.sup());
    }
    let grid = f.grid();
    let sum: f64 = grid.quad_weights.iter().zip(&f.values).map(|(w, v)| w * v.norm().powf(p)).sum();
    Ok(sum.powf(1.0 / p))
}

/// `∫_D f ḡ dA` by quadrature.
pub fn inner(f: &ComplexField, g: &ComplexField) -> Result<Complex64> {
    if !f.same_grid(g) {
        return Err(Error::Usage("inner product of fields on different grids".into()));
    }
    Ok(f.grid.quad_weights.iter().zip(f.values.iter().zip(&g.values)).map(|(w, (a, b))| a * b.conj() * w).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn grid_weights_sum_to_area() {
        let g = build_grid(64, 128).unwrap();
        let s: f64 = g.quad_weights().iter().sum();
        assert!((s - PI).abs() < 1e-10);
        assert_eq!(*g.radial_nodes().last().unwrap(), 1.0);
        assert!(g.radial_nodes().iter().all(|&r| r > 0.0 && r <= 1.0));
    }

    #[test]
    fn minimal_grid_and_rejections() {
        assert!(build_grid(4, 8).is_ok());
        assert!(matches!(build_grid(3, 8), Err(Error::Config(_))));
        assert!(matches!(build_grid(4, 6), Err(Error::Config(_))));
        assert!(matches!(build_grid(4, 9), Err(Error::Config(_))));
    }

    #[test]
    fn angles_are_equispaced() {
        let g = build_grid(8, 16).unwrap();
        let a = g.angles();
        assert_eq!(a[0], 0.0);
        for w in a.windows(2) {
            assert!((w[1] - w[0] - 2.0 * PI / 16.0).abs() < 1e-15);
        }
    }

    #[test]
    fn monomial_derivatives() {
        let g = build_grid(32, 64).unwrap();
        let zeta = ComplexField::from_fn(&g, |z| z);
        let zbar = ComplexField::from_fn(&g, |z| z.conj());
        let one = ComplexField::constant(&g, c(1.0, 0.0));
        let zero = ComplexField::zeros(&g);
        let close = |a: &ComplexField, b: &ComplexField| (a - b).sup();
        assert!(close(&dbar(&zbar), &one) < 1e-11);
        assert!(close(&dbar(&zeta), &zero) < 1e-11);
        assert!(close(&dz(&zeta), &one) < 1e-11);
        assert!(close(&dz(&zbar), &zero) < 1e-11);
        let zz = ComplexField::from_fn(&g, |z| z * z.conj());
        assert!(close(&dbar(&zz), &zeta) < 1e-11);
        let z2zb = ComplexField::from_fn(&g, |z| z * z * z.conj());
        let expect = ComplexField::from_fn(&g, |z| 2.0 * z * z.conj());
        assert!(close(&dz(&z2zb), &expect) < 1e-11);
    }

    #[test]
    fn norms_and_inner_products() {
        let g = build_grid(32, 64).unwrap();
        let one = ComplexField::constant(&g, c(1.0, 0.0));
        let zeta = ComplexField::from_fn(&g, |z| z);
        assert!((norm(&one, 2.0).unwrap() - PI.sqrt()).abs() < 1e-12);
        assert!((norm(&zeta, 2.0).unwrap() - (PI / 2.0).sqrt()).abs() < 1e-12);
        assert_eq!(norm(&ComplexField::zeros(&g), 3.0).unwrap(), 0.0);
        assert!(matches!(norm(&one, 0.5), Err(Error::Config(_))));
        assert!((norm(&zeta, f64::INFINITY).unwrap() - 1.0).abs() < 1e-15);
        assert!((inner(&one, &one).unwrap() - c(PI, 0.0)).norm() < 1e-12);
        assert!(inner(&zeta, &one).unwrap().norm() < 1e-14);
        assert!((inner(&zeta, &zeta).unwrap() - c(PI / 2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn inner_rejects_grid_mismatch() {
        let a = ComplexField::zeros(&build_grid(8, 16).unwrap());
        let b = ComplexField::zeros(&build_grid(8, 32).unwrap());
        assert!(matches!(inner(&a, &b), Err(Error::Usage(_))));
    }

    #[test]
    fn csv_layout() {
        let g = build_grid(4, 8).unwrap();
        let f = ComplexField::from_fn(&g, |z| z);
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "r,theta,re,im");
        assert_eq!(lines.len(), 1 + 32);
        // last row is the boundary ring, last angle
        let last: Vec<f64> = lines[32].split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(last[0], 1.0);
        assert!((last[1] - 7.0 * PI / 4.0).abs() < 1e-15);
        assert_eq!(lines[1].split(',').next().unwrap().len(), "1.2345678901234567e-1".len());
    }
}
