//! Critical points of strictly plurisubharmonic Morse functions on `C²`:
//! Takagi factorization, the quadratic normal form, a slowly decaying cut-off,
//! the crossing profile and the totally real core set.
//!
//! Points of `C²` are real 4-vectors `(x1, y1, x2, y2)` as in [`crate::acstructure`].

use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::acstructure::{levi_min_eigenvalue_st, realify_antilinear, to_complex};
use crate::beltrami::MonomialTerm;
use crate::{Error, Result};

pub type ComplexMatrix = Matrix2<Complex64>;

const C0: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const C1: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Quintic smoothstep: 0 below 0, 1 above 1, `C²`.
pub fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (t * (6.0 * t - 15.0) + 10.0)
}

fn smoothstep_d1(t: f64) -> f64 {
    if !(0.0..=1.0).contains(&t) {
        return 0.0;
    }
    30.0 * t * t * (t - 1.0) * (t - 1.0)
}

fn smoothstep_d2(t: f64) -> f64 {
    if !(0.0..=1.0).contains(&t) {
        return 0.0;
    }
    60.0 * t * (t - 1.0) * (2.0 * t - 1.0)
}

/// `∫₀^x S` for `x ∈ [0, 1]`.
fn smoothstep_integral(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x.powi(6) - 3.0 * x.powi(5) + 2.5 * x.powi(4)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Takagi {
    /// Columns are the new basis vectors.
    pub u: ComplexMatrix,
    /// Diagonal of `UᵗBU`, sorted non-increasing.
    pub d: [f64; 2],
}

/// Unitary `U` with `UᵗBU = diag(d₁, d₂)`, `d₁ ≥ d₂ ≥ 0`.
///
/// The antilinear map `L u = conj(B u)` satisfies `⟨x, L u⟩ = xᵗBu`, and its real form is
/// symmetric. A unit eigenvector for the top eigenvalue gives `u₁`; its orthogonal
/// complement gives `u₂`, rotated so that `u₂ᵗBu₂ ≥ 0`.
pub fn takagi(b: &ComplexMatrix) -> Result<Takagi> {
    let asym = (b - b.transpose()).iter().map(|e| e.norm()).fold(0.0, f64::max);
    if !(asym <= 1e-12) {
        return Err(Error::Usage(format!("matrix is not symmetric: max |B − Bᵗ| = {asym:.3e}")));
    }
    let scale = b.iter().map(|e| e.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(Takagi { u: ComplexMatrix::identity(), d: [0.0, 0.0] });
    }
    if b[(0, 1)].norm() <= 1e-15 * scale {
        // already diagonal: phases, and a swap if the second entry dominates
        let phase = |c: Complex64| if c.norm() == 0.0 { C1 } else { Complex64::from_polar(1.0, -c.arg() / 2.0) };
        let (d0, d1) = (b[(0, 0)], b[(1, 1)]);
        return Ok(if d0.norm() >= d1.norm() {
            Takagi { u: ComplexMatrix::new(phase(d0), C0, C0, phase(d1)), d: [d0.norm(), d1.norm()] }
        } else {
            Takagi { u: ComplexMatrix::new(C0, phase(d0), phase(d1), C0), d: [d1.norm(), d0.norm()] }
        });
    }
    let conj_b = b.map(|e| e.conj());
    let real: Matrix4<f64> = realify_antilinear(&conj_b);
    let sym = (real + real.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let top = eig.eigenvalues.imax();
    let vec = eig.eigenvectors.column(top);
    let (a, c) = to_complex(&Vector4::new(vec[0], vec[1], vec[2], vec[3]));
    let n = (a.norm_sqr() + c.norm_sqr()).sqrt();
    let u1 = [a / n, c / n];
    let mut u2 = [-u1[1].conj(), u1[0].conj()];
    let bil = |x: &[Complex64; 2], y: &[Complex64; 2]| {
        x[0] * (b[(0, 0)] * y[0] + b[(0, 1)] * y[1]) + x[1] * (b[(1, 0)] * y[0] + b[(1, 1)] * y[1])
    };
    let c2 = bil(&u2, &u2);
    if c2.norm() > 0.0 {
        let rot = Complex64::from_polar(1.0, -c2.arg() / 2.0);
        u2 = [u2[0] * rot, u2[1] * rot];
    }
    let d1 = bil(&u1, &u1).re.max(0.0);
    let d2 = bil(&u2, &u2).re.max(0.0);
    Ok(Takagi { u: ComplexMatrix::new(u1[0], u2[0], u1[1], u2[1]), d: [d1, d2] })
}

/// `ρ(z) = ρ0 + Σ a_ij z_i z̄_j + Re Σ b_ij z_i z_j + Re Σ cubic(z1, z2)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadraticData {
    pub a: [[Complex64; 2]; 2],
    pub b: [[Complex64; 2]; 2],
    #[serde(default)]
    pub rho0: f64,
    /// Higher-order terms `c z1^i z̄1^j z2^k z̄2^l` of total degree ≥ 3 (real part taken).
    #[serde(default)]
    pub cubic: Vec<MonomialTerm>,
}

impl QuadraticData {
    pub fn a_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::new(self.a[0][0], self.a[0][1], self.a[1][0], self.a[1][1])
    }

    pub fn b_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::new(self.b[0][0], self.b[0][1], self.b[1][0], self.b[1][1])
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.a_matrix();
        let herm = (a - a.adjoint()).iter().map(|e| e.norm()).fold(0.0, f64::max);
        if herm > 1e-12 {
            return Err(Error::Usage(format!("hermitian part is not hermitian: defect {herm:.3e}")));
        }
        let b = self.b_matrix();
        let sym = (b - b.transpose()).iter().map(|e| e.norm()).fold(0.0, f64::max);
        if sym > 1e-12 {
            return Err(Error::Usage(format!("symmetric part is not symmetric: defect {sym:.3e}")));
        }
        let (a11, a22, a12) = (a[(0, 0)].re, a[(1, 1)].re, a[(0, 1)]);
        if !(a11 > 0.0 && a11 * a22 - a12.norm_sqr() > 0.0) {
            return Err(Error::Config("hermitian part must be positive definite".into()));
        }
        if let Some(t) = self.cubic.iter().find(|t| t.i + t.j + t.k + t.l < 3) {
            return Err(Error::Config(format!(
                "remainder terms must have degree ≥ 3, got ({}, {}, {}, {})",
                t.i, t.j, t.k, t.l
            )));
        }
        Ok(())
    }

    pub fn quadratic_part(&self, z: [Complex64; 2]) -> f64 {
        let mut s = C0;
        for i in 0..2 {
            for j in 0..2 {
                s += self.a[i][j] * z[i] * z[j].conj() + self.b[i][j] * z[i] * z[j];
            }
        }
        // the hermitian sum is real; the bilinear sum enters through its real part
        s.re
    }

    pub fn remainder(&self, z: [Complex64; 2]) -> f64 {
        self.cubic.iter().map(|t| t.eval(z[0], z[1]).re).sum()
    }

    /// `ρ(z) − ρ0`.
    pub fn eval_offset(&self, z: [Complex64; 2]) -> f64 {
        self.quadratic_part(z) + self.remainder(z)
    }

    pub fn eval(&self, z: [Complex64; 2]) -> f64 {
        self.rho0 + self.eval_offset(z)
    }
}

/// Bump `λ0(t)`: 1 on `[0, ½]`, 0 for `t ≥ 1`.
pub fn bump(t: f64) -> f64 {
    1.0 - smoothstep(2.0 * t - 1.0)
}

/// `φ(t) = ψ(δ ln max(t, 1))` with `ψ = 1 − S((x − x0)/width)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffProfile {
    pub delta: f64,
    /// Offset `x0` of the template transition in the log variable.
    pub x0: f64,
    /// Width of the template transition in the log variable.
    pub width: f64,
}

impl CutoffProfile {
    pub fn phi(&self, t: f64) -> f64 {
        if t <= 1.0 {
            return 1.0;
        }
        1.0 - smoothstep((self.delta * t.ln() - self.x0) / self.width)
    }

    pub fn d_phi(&self, t: f64) -> f64 {
        if t <= 1.0 {
            return 0.0;
        }
        let x = (self.delta * t.ln() - self.x0) / self.width;
        -smoothstep_d1(x) * self.delta / (self.width * t)
    }

    pub fn d2_phi(&self, t: f64) -> f64 {
        if t <= 1.0 {
            return 0.0;
        }
        let x = (self.delta * t.ln() - self.x0) / self.width;
        let s1 = smoothstep_d1(x) / self.width;
        let s2 = smoothstep_d2(x) / (self.width * self.width);
        // φ' = −δ s1 / t, so φ'' = (δ s1 − δ² s2) / t²
        (self.delta * s1 - self.delta * self.delta * s2) / (t * t)
    }

    /// End of the support: `φ(t) = 0` for `t ≥ support_end`.
    pub fn support_end(&self) -> f64 {
        ((self.x0 + self.width) / self.delta).exp()
    }

    /// `φ ≡ 1` on `[0, flat_end]`.
    pub fn flat_end(&self) -> f64 {
        (self.x0 / self.delta).exp()
    }
}

pub fn slow_cutoff(delta: f64) -> Result<CutoffProfile> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Config(format!("δ must lie in (0, 1), got {delta}")));
    }
    // width 4 keeps |ψ'| ≤ 1.875/4 and |ψ''| ≤ 5.78/16, both below ½
    Ok(CutoffProfile { delta, x0: 0.05, width: 4.0 })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MorseModel {
    pub data: QuadraticData,
    pub index: usize,
    /// Normal-form coefficients `(a1, a2)`.
    pub coeffs: [f64; 2],
    /// Takagi values before standardization.
    pub takagi_values: [f64; 2],
    pub epsilon: f64,
    pub cutoff: CutoffProfile,
    /// `z = change · ξ` maps normal-form coordinates to the input ones.
    pub change: [[Complex64; 2]; 2],
    pub unitary: [[Complex64; 2]; 2],
    pub certificate: MorseCertificate,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MorseCertificate {
    pub samples: usize,
    /// Smallest Levi eigenvalue at `J_st` over the sampled shells.
    pub min_levi: f64,
    /// Smallest `|∇ρ̃(ξ)| / |ξ|` over sampled `ξ ≠ 0`.
    pub min_gradient_ratio: f64,
    /// `max |ρ̃ − normal form| / |ξ|²` on `|ξ| ≤ ε/2`.
    pub normal_form_deviation: f64,
    /// `max |ρ̃ − ρ|` beyond the support radius.
    pub outside_deviation: f64,
}

/// Values closer than this to 1 are rejected as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-6;

fn to_rows(m: &ComplexMatrix) -> [[Complex64; 2]; 2] {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

fn from_rows(m: &[[Complex64; 2]; 2]) -> ComplexMatrix {
    ComplexMatrix::new(m[0][0], m[0][1], m[1][0], m[1][1])
}

pub fn morse_normal_form(q: &QuadraticData, k: usize, epsilon: f64, delta: f64) -> Result<MorseModel> {
    q.validate()?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Config(format!("ε must be positive, got {epsilon}")));
    }
    let cutoff = slow_cutoff(delta)?;
    let a = q.a_matrix();
    let a11 = a[(0, 0)].re;
    let a12 = a[(0, 1)];
    let a22 = a[(1, 1)].re;
    // a = R^H R with R upper triangular
    let r11 = a11.sqrt();
    let r12 = a12 / r11;
    let r22 = (a22 - r12.norm_sqr()).sqrt();
    let r = ComplexMatrix::new(Complex64::new(r11, 0.0), r12, C0, Complex64::new(r22, 0.0));
    // zᵗ a z̄ = |η|² for z = conj(R⁻¹) η
    let r_inv = r.try_inverse().ok_or_else(|| Error::Degenerate("hermitian part is singular".into()))?;
    let lin = r_inv.map(|e| e.conj());
    let b1 = lin.transpose() * q.b_matrix() * lin;
    let tk = takagi(&b1)?;
    // η = iU ξ turns Re ηᵗ b1 η into −Re Σ d_j ξ_j²
    let v = tk.u * Complex64::i();
    let change = lin * v;

    let values = tk.d;
    if let Some(d) = values.iter().find(|d| (**d - 1.0).abs() < DEGENERACY_GAP) {
        return Err(Error::Degenerate(format!("normal-form coefficient {d} is within {DEGENERACY_GAP:e} of 1")));
    }
    let measured = values.iter().filter(|d| **d > 1.0).count();
    if measured != k {
        return Err(Error::Consistency(format!(
            "declared index {k} but the quadratic part has index {measured} (coefficients {values:?})"
        )));
    }
    let coeffs = values.map(|d| if d > 1.0 { 2.0 } else { 0.0 });
    let mut model = MorseModel {
        data: q.clone(),
        index: k,
        coeffs,
        takagi_values: values,
        epsilon,
        cutoff,
        change: to_rows(&change),
        unitary: to_rows(&tk.u),
        certificate: MorseCertificate::default(),
    };
    model.certificate = model.certify();
    let cert = &model.certificate;
    if !(cert.min_levi > 0.0) {
        return Err(Error::Construction(format!(
            "modified function is not strictly plurisubharmonic (min Levi eigenvalue {:.3e}); \
             ε·exp((x0 + width)/δ) = {:.3e} is too large for the remainder",
            cert.min_levi,
            model.support_radius()
        )));
    }
    if !(cert.min_gradient_ratio > 0.0) {
        return Err(Error::Construction("spurious critical point in the modified region".into()));
    }
    Ok(model)
}

impl MorseModel {
    fn to_input(&self, xi: [Complex64; 2]) -> [Complex64; 2] {
        let c = from_rows(&self.change);
        let z = c * nalgebra::Vector2::new(xi[0], xi[1]);
        [z[0], z[1]]
    }

    pub fn to_normal(&self, z: [Complex64; 2]) -> Result<[Complex64; 2]> {
        let c = from_rows(&self.change)
            .try_inverse()
            .ok_or_else(|| Error::Degenerate("coordinate change is singular".into()))?;
        let xi = c * nalgebra::Vector2::new(z[0], z[1]);
        Ok([xi[0], xi[1]])
    }

    /// Radius in normal-form coordinates beyond which the model equals the input.
    pub fn support_radius(&self) -> f64 {
        self.epsilon * self.cutoff.support_end()
    }

    /// `ρ̃ − ρ0` in normal-form coordinates.
    pub fn eval_normal_offset(&self, xi: [Complex64; 2]) -> f64 {
        let z = self.to_input(xi);
        let base = self.data.eval_offset(z);
        let r = (xi[0].norm_sqr() + xi[1].norm_sqr()).sqrt();
        let t = r / self.epsilon;
        let removal = if t < 1.0 { bump(t) * self.data.remainder(z) } else { 0.0 };
        let lam = self.cutoff.phi(t);
        let std = if lam > 0.0 {
            let a = self.takagi_values;
            let b = self.coeffs;
            lam * ((a[0] - b[0]) * (xi[0] * xi[0]).re + (a[1] - b[1]) * (xi[1] * xi[1]).re)
        } else {
            0.0
        };
        base - removal + std
    }

    pub fn eval_normal(&self, xi: [Complex64; 2]) -> f64 {
        self.data.rho0 + self.eval_normal_offset(xi)
    }

    /// `ρ̃` in the input coordinates.
    pub fn eval(&self, z: [Complex64; 2]) -> Result<f64> {
        Ok(self.eval_normal(self.to_normal(z)?))
    }

    /// `ρ0 + |ξ|² − a1 Re ξ1² − a2 Re ξ2²`.
    pub fn normal_form(&self, xi: [Complex64; 2]) -> f64 {
        self.data.rho0 + xi[0].norm_sqr() + xi[1].norm_sqr()
            - self.coeffs[0] * (xi[0] * xi[0]).re
            - self.coeffs[1] * (xi[1] * xi[1]).re
    }

    /// Smallest Levi eigenvalue of `ρ̃` at `J_st` (normal-form coordinates), relative to `|ξ|²`
    /// scaling: a step proportional to the local length scale keeps differences well resolved.
    pub fn levi_min(&self, xi: [Complex64; 2]) -> f64 {
        let r = (xi[0].norm_sqr() + xi[1].norm_sqr()).sqrt();
        let h = 1e-3 * r.max(self.epsilon);
        let f = |p: &Vector4<f64>| {
            let (a, b) = to_complex(p);
            self.eval_normal_offset([a, b])
        };
        let p = Vector4::new(xi[0].re, xi[0].im, xi[1].re, xi[1].im);
        levi_min_eigenvalue_st(&f, &p, h)
    }

    /// Sampled checks on log-spaced shells from `ε/100` to three times the support radius.
    pub fn certify(&self) -> MorseCertificate {
        let eps = self.epsilon;
        let lo = eps * 0.01;
        let hi = 3.0 * self.support_radius();
        let mut cert = MorseCertificate {
            samples: 0,
            min_levi: f64::INFINITY,
            min_gradient_ratio: f64::INFINITY,
            normal_form_deviation: 0.0,
            outside_deviation: 0.0,
        };
        let shells = 240;
        for i in 0..shells {
            let r = lo * (hi / lo).powf(i as f64 / (shells - 1) as f64);
            for j in 0..8 {
                let th = j as f64 * 0.7 + i as f64 * 0.13;
                let xi = [Complex64::from_polar(r * th.cos(), 1.3 * th), Complex64::from_polar(r * th.sin(), -th)];
                cert.samples += 1;
                cert.min_levi = cert.min_levi.min(self.levi_min(xi));
                cert.min_gradient_ratio = cert.min_gradient_ratio.min(self.gradient_norm(xi) / r);
                if r <= eps / 2.0 {
                    let dev = (self.eval_normal(xi) - self.normal_form(xi)).abs() / (r * r);
                    cert.normal_form_deviation = cert.normal_form_deviation.max(dev);
                }
                if r > self.support_radius() {
                    let z = self.to_input(xi);
                    cert.outside_deviation =
                        cert.outside_deviation.max((self.eval_normal(xi) - self.data.eval(z)).abs());
                }
            }
        }
        cert
    }

    /// Gradient norm of `ρ̃` in normal-form coordinates, by central differences.
    pub fn gradient_norm(&self, xi: [Complex64; 2]) -> f64 {
        let r = (xi[0].norm_sqr() + xi[1].norm_sqr()).sqrt();
        let h = 1e-6 * r.max(self.epsilon);
        let p = Vector4::new(xi[0].re, xi[0].im, xi[1].re, xi[1].im);
        let f = |p: Vector4<f64>| {
            let (a, b) = to_complex(&p);
            self.eval_normal_offset([a, b])
        };
        (0..4)
            .map(|i| {
                let mut e = Vector4::zeros();
                e[i] = h;
                ((f(p + e) - f(p - e)) / (2.0 * h)).powi(2)
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// `h(s) = s − g(s)`, where `g(s) = s` up to `s_a`, then `g' = 1 − S((s − s_a)/L)` with
/// `L = s_b − s_a`, and `g` is constant beyond `s_b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpliceProfile {
    pub s_a: f64,
    pub s_b: f64,
}

impl Default for SpliceProfile {
    fn default() -> Self {
        Self { s_a: 0.02, s_b: 0.98 }
    }
}

impl SpliceProfile {
    fn len(&self) -> f64 {
        self.s_b - self.s_a
    }

    pub fn g(&self, s: f64) -> f64 {
        if s <= self.s_a {
            return s;
        }
        let x = ((s - self.s_a) / self.len()).min(1.0);
        self.s_a + self.len() * (x - smoothstep_integral(x))
    }

    pub fn h(&self, s: f64) -> f64 {
        s - self.g(s)
    }

    pub fn h1(&self, s: f64) -> f64 {
        smoothstep((s - self.s_a) / self.len())
    }

    pub fn h2(&self, s: f64) -> f64 {
        smoothstep_d1((s - self.s_a) / self.len()) / self.len()
    }
}

/// The modified function near a critical point of index `k` in rescaled coordinates
/// `w_j = u_j + i v_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingProfile {
    pub k: usize,
    pub splice: SpliceProfile,
    pub tau0: f64,
    pub tau1: f64,
    /// Smallest Levi eigenvalue over the sample box.
    pub min_levi: f64,
    /// Largest violation of each property over the sample box (0 when satisfied).
    pub violations: PropertyViolations,
    pub inclusions: InclusionChecks,
    pub samples: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PropertyViolations {
    pub lower: f64,
    pub upper: f64,
    pub tau0_gap: f64,
    pub plateau: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InclusionChecks {
    /// `{ρ̂ ≤ −1} ∪ E ⊂ {φ ≤ 0}`
    pub inner_lower: bool,
    /// `{φ ≤ 0} ⊂ {ρ̂ ≤ −τ0} ∪ E`
    pub inner_upper: bool,
    /// `{ρ̂ ≤ 1} ⊂ {φ ≤ 2}`
    pub outer_lower: bool,
    /// `{φ ≤ 2} ⊂ {ρ̂ < 3}`
    pub outer_upper: bool,
}

impl InclusionChecks {
    pub fn all(&self) -> bool {
        self.inner_lower && self.inner_upper && self.outer_lower && self.outer_upper
    }
}

/// `ρ̂` in rescaled coordinates `p = (u1, v1, u2, v2)`.
pub fn rho_hat(k: usize, p: &Vector4<f64>) -> f64 {
    let (u1, v1, u2, v2) = (p[0], p[1], p[2], p[3]);
    if k == 1 {
        3.0 * v1 * v1 + v2 * v2 - u1 * u1 + u2 * u2
    } else {
        3.0 * v1 * v1 + 3.0 * v2 * v2 - u1 * u1 - u2 * u2
    }
}

fn u_prime_sq(k: usize, p: &Vector4<f64>) -> f64 {
    if k == 1 {
        p[0] * p[0]
    } else {
        p[0] * p[0] + p[2] * p[2]
    }
}

impl CrossingProfile {
    pub fn phi(&self, p: &Vector4<f64>) -> f64 {
        let (u1, v1, u2, v2) = (p[0], p[1], p[2], p[3]);
        if self.k == 1 {
            3.0 * v1 * v1 + v2 * v2 - self.splice.h(u1 * u1) + u2 * u2
        } else {
            3.0 * v1 * v1 + 3.0 * v2 * v2 - self.splice.h(u1 * u1 + u2 * u2)
        }
    }

    /// Exact smallest Levi eigenvalue at `J_st` from the closed-form Hessian of `h`.
    pub fn levi_min_exact(&self, p: &Vector4<f64>) -> f64 {
        let s = u_prime_sq(self.k, p);
        let radial = 6.0 - 2.0 * self.splice.h1(s) - 4.0 * self.splice.h2(s) * s;
        if self.k == 1 {
            radial.min(4.0)
        } else {
            radial.min(6.0 - 2.0 * self.splice.h1(s))
        }
    }
}

/// Deterministic sample of the box `[-2, 2]⁴` (uniform lattice plus radial lines in `u′`).
fn box_samples(k: usize) -> Vec<Vector4<f64>> {
    let mut pts = Vec::new();
    let n = 13;
    let coord = |i: usize| -2.0 + 4.0 * i as f64 / (n - 1) as f64;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    pts.push(Vector4::new(coord(a), coord(b), coord(c), coord(d)));
                }
            }
        }
    }
    // dense radial lines through the splice region
    for i in 0..=400 {
        let s = 1.2 * i as f64 / 400.0;
        let r = s.sqrt();
        pts.push(Vector4::new(r, 0.0, 0.0, 0.0));
        if k == 2 {
            pts.push(Vector4::new(r * 0.6, 0.0, r * 0.8, 0.0));
        }
        pts.push(Vector4::new(r, 0.3, 0.0, 0.1));
    }
    pts
}

pub fn crossing_profile(k: usize) -> Result<CrossingProfile> {
    crossing_profile_with(k, SpliceProfile::default())
}

pub fn crossing_profile_with(k: usize, splice: SpliceProfile) -> Result<CrossingProfile> {
    if k != 1 && k != 2 {
        return Err(Error::Config(format!("crossing profile needs index 1 or 2, got {k}")));
    }
    if !(0.0 < splice.s_a && splice.s_a < splice.s_b && splice.s_b < 1.0) {
        return Err(Error::Config(format!("splice needs 0 < s_a < s_b < 1, got {splice:?}")));
    }
    let mut prof = CrossingProfile {
        k,
        splice,
        tau0: 0.0,
        tau1: 0.0,
        min_levi: f64::INFINITY,
        violations: PropertyViolations::default(),
        inclusions: InclusionChecks::default(),
        samples: 0,
    };
    let pts = box_samples(k);
    prof.samples = pts.len();
    // τ1 is the plateau of φ − ρ̂; τ0 the smallest gap on {|u′|² ≥ τ0}, which for a
    // monotone splice is the identity part's end
    let tau1 = splice.g(2.0);
    let tau0 = splice.g(splice.s_a);
    prof.tau0 = tau0;
    prof.tau1 = tau1;
    let slack = 1e-9;
    let e_hat = TotallyRealSet::new(1.0, k)?;
    let mut inc = InclusionChecks { inner_lower: true, inner_upper: true, outer_lower: true, outer_upper: true };
    for p in &pts {
        let rho = rho_hat(k, p);
        let phi = prof.phi(p);
        let diff = phi - rho;
        let s = u_prime_sq(k, p);
        let v = &mut prof.violations;
        v.lower = v.lower.max(-diff);
        v.upper = v.upper.max(diff - tau1);
        if s >= tau0 {
            v.tau0_gap = v.tau0_gap.max(tau0 - diff);
        }
        if s >= 1.0 {
            v.plateau = v.plateau.max((diff - tau1).abs());
        }
        let levi = prof.levi_min_exact(p);
        let levi_fd = {
            let f = |q: &Vector4<f64>| prof.phi(q);
            levi_min_eigenvalue_st(&f, p, 1e-4)
        };
        prof.min_levi = prof.min_levi.min(levi).min(levi_fd);

        let in_e = e_hat.contains(p);
        if (rho <= -1.0 || in_e) && phi > slack {
            inc.inner_lower = false;
        }
        if phi <= 0.0 && !(rho <= -tau0 + slack || e_hat.distance(p) <= slack) {
            inc.inner_upper = false;
        }
        if rho <= 1.0 && phi > 2.0 + slack {
            inc.outer_lower = false;
        }
        if phi <= 2.0 && rho >= 3.0 {
            inc.outer_upper = false;
        }
    }
    // E itself: the slab points
    for i in 0..=100 {
        let x = -1.0 + 2.0 * i as f64 / 100.0;
        let p = if k == 1 { Vector4::new(x, 0.0, 0.0, 0.0) } else { Vector4::new(x * 0.6, 0.0, x * 0.8, 0.0) };
        if prof.phi(&p) > slack {
            inc.inner_lower = false;
        }
    }
    prof.inclusions = inc;

    let v = &prof.violations;
    let checks = [
        ("ρ̂ ≤ φ", v.lower),
        ("φ ≤ ρ̂ + τ1", v.upper),
        ("φ ≥ ρ̂ + τ0 on |u′|² ≥ τ0", v.tau0_gap),
        ("φ = ρ̂ + τ1 on |u′|² ≥ 1", v.plateau),
    ];
    if let Some((name, val)) = checks.iter().find(|(_, val)| *val > slack) {
        return Err(Error::Construction(format!("property {name} violated by {val:.3e}")));
    }
    if !(prof.min_levi > 0.0) {
        return Err(Error::Construction(format!(
            "strict plurisubharmonicity fails: min Levi eigenvalue {:.3e}",
            prof.min_levi
        )));
    }
    if !(0.0 < tau0 && tau0 < tau1 && tau1 < 1.0) {
        return Err(Error::Construction(format!("constants out of order: τ0 = {tau0}, τ1 = {tau1}")));
    }
    Ok(prof)
}

/// `E = {y′ = 0, z″ = 0, |x′|² ≤ c0}`, with `z′ = z1` for `k = 1` and `z′ = (z1, z2)` for `k = 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TotallyRealSet {
    pub c0: f64,
    pub k: usize,
}

impl TotallyRealSet {
    pub fn new(c0: f64, k: usize) -> Result<Self> {
        if !(c0 > 0.0 && c0.is_finite()) {
            return Err(Error::Config(format!("c0 must be positive, got {c0}")));
        }
        if k != 1 && k != 2 {
            return Err(Error::Config(format!("k must be 1 or 2, got {k}")));
        }
        Ok(Self { c0, k })
    }

    pub fn contains(&self, p: &Vector4<f64>) -> bool {
        let (x1, y1, x2, y2) = (p[0], p[1], p[2], p[3]);
        let within = |r2: f64| r2 <= self.c0 * (1.0 + 4.0 * f64::EPSILON);
        if self.k == 1 {
            y1 == 0.0 && x2 == 0.0 && y2 == 0.0 && within(x1 * x1)
        } else {
            y1 == 0.0 && y2 == 0.0 && within(x1 * x1 + x2 * x2)
        }
    }

    pub fn distance(&self, p: &Vector4<f64>) -> f64 {
        let (x1, y1, x2, y2) = (p[0], p[1], p[2], p[3]);
        let r = self.c0.sqrt();
        if self.k == 1 {
            let out = (x1.abs() - r).max(0.0);
            (y1 * y1 + x2 * x2 + y2 * y2 + out * out).sqrt()
        } else {
            let out = (x1.hypot(x2) - r).max(0.0);
            (y1 * y1 + y2 * y2 + out * out).sqrt()
        }
    }
}

pub fn totally_real_e(c0: f64, k: usize) -> Result<TotallyRealSet> {
    TotallyRealSet::new(c0, k)
}
