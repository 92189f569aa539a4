//! Almost complex structures on `C²` in real coordinates `(x1, y1, x2, y2)`.
//!
//! A structure `J` close to `J_st` is encoded by the complex 2×2 matrix `A` with
//! `A v̄ = (J_st + J)^{-1}(J_st − J) v`; a map `f` from the disc is `J`-holomorphic
//! iff `∂f/∂ζ̄ = A(f) conj(∂f/∂ζ)`.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::beltrami::{CoefficientPair, MonomialTerm};
use crate::{Error, Result};

pub type RealMatrix = Matrix4<f64>;
pub type ComplexMatrix = Matrix2<Complex64>;

const C0: Complex64 = Complex64 { re: 0.0, im: 0.0 };

pub fn j2() -> nalgebra::Matrix2<f64> {
    nalgebra::Matrix2::new(0.0, -1.0, 1.0, 0.0)
}

pub fn j_st() -> RealMatrix {
    let mut m = RealMatrix::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(&j2());
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(&j2());
    m
}

pub fn to_real(z: Complex64, w: Complex64) -> Vector4<f64> {
    Vector4::new(z.re, z.im, w.re, w.im)
}

pub fn to_complex(p: &Vector4<f64>) -> (Complex64, Complex64) {
    (Complex64::new(p[0], p[1]), Complex64::new(p[2], p[3]))
}

/// Real form of the complex-linear map `v ↦ C v`.
pub fn realify_linear(c: &ComplexMatrix) -> RealMatrix {
    let mut m = RealMatrix::zeros();
    for r in 0..2 {
        for s in 0..2 {
            let e = c[(r, s)];
            m[(2 * r, 2 * s)] = e.re;
            m[(2 * r, 2 * s + 1)] = -e.im;
            m[(2 * r + 1, 2 * s)] = e.im;
            m[(2 * r + 1, 2 * s + 1)] = e.re;
        }
    }
    m
}

/// Real form of the antilinear map `v ↦ C v̄`.
pub fn realify_antilinear(c: &ComplexMatrix) -> RealMatrix {
    let mut m = RealMatrix::zeros();
    for r in 0..2 {
        for s in 0..2 {
            let e = c[(r, s)];
            m[(2 * r, 2 * s)] = e.re;
            m[(2 * r, 2 * s + 1)] = e.im;
            m[(2 * r + 1, 2 * s)] = e.im;
            m[(2 * r + 1, 2 * s + 1)] = -e.re;
        }
    }
    m
}

/// `J = J_st (I − M)(I + M)^{-1}` for the real form `M` of `v ↦ A v̄`.
pub fn j_from_a(a: &ComplexMatrix) -> Result<RealMatrix> {
    let m = realify_antilinear(a);
    let id = RealMatrix::identity();
    let inv = (id + m)
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("I + M is singular; A has an eigenvalue of modulus 1".into()))?;
    Ok(j_st() * (id - m) * inv)
}

/// The complex matrix of `v ↦ (J_st + J)^{-1}(J_st − J) v`, read off as an antilinear map.
pub fn a_from_j(j: &RealMatrix) -> Option<ComplexMatrix> {
    let inv = (j_st() + j).try_inverse()?;
    let m = inv * (j_st() - j);
    let mut a = ComplexMatrix::zeros();
    for s in 0..2 {
        for r in 0..2 {
            a[(r, s)] = Complex64::new(m[(2 * r, 2 * s)], m[(2 * r + 1, 2 * s)]);
        }
    }
    Some(a)
}

/// Newton iteration `J ← (J − J^{-1})/2` onto `{J² = −I}`.
pub fn project_to_structure(j: &RealMatrix) -> Result<RealMatrix> {
    let mut j = *j;
    for _ in 0..60 {
        if square_defect(&j) < 1e-15 {
            return Ok(j);
        }
        let inv = j.try_inverse().ok_or_else(|| Error::Construction("singular matrix during projection".into()))?;
        j = (j - inv) * 0.5;
    }
    let defect = square_defect(&j);
    if defect < 1e-12 {
        Ok(j)
    } else {
        Err(Error::Construction(format!("projection onto J² = −I stalled at defect {defect:.3e}")))
    }
}

/// `max |(J² + I)_ij|`.
pub fn square_defect(j: &RealMatrix) -> f64 {
    (j * j + RealMatrix::identity()).abs().max()
}

/// A field of structures on `C²`.
pub trait Structure {
    fn at(&self, z: Complex64, w: Complex64) -> RealMatrix;

    fn at_real(&self, p: &Vector4<f64>) -> RealMatrix {
        let (z, w) = to_complex(p);
        self.at(z, w)
    }
}

impl<F: Fn(Complex64, Complex64) -> RealMatrix> Structure for F {
    fn at(&self, z: Complex64, w: Complex64) -> RealMatrix {
        self(z, w)
    }
}

/// Additive perturbation `J[row][col] += Re(term(z, w))` of `J_st`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryTerm {
    pub row: usize,
    pub col: usize,
    pub term: MonomialTerm,
}

/// Structures declared in configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StructureSpec {
    Standard {},
    /// Built from `A = [[a, 0], [b, 0]]`; every term must carry `w` or `w̄`.
    Admissible {
        a_terms: Vec<MonomialTerm>,
        b_terms: Vec<MonomialTerm>,
    },
    /// `J_st` plus polynomial entries, projected onto `J² = −I`.
    Perturbed {
        entries: Vec<EntryTerm>,
    },
}

impl StructureSpec {
    /// The bundled admissible example: `a = 0.1 w + 0.02 z w̄`, `b = 0.1 w − 0.05 z̄ w`.
    pub fn synthetic() -> Self {
        let t = |re: f64, im: f64, i, j, k, l| MonomialTerm::new(Complex64::new(re, im), i, j, k, l);
        StructureSpec::Admissible {
            a_terms: vec![t(0.1, 0.0, 0, 0, 1, 0), t(0.02, 0.0, 1, 0, 0, 1)],
            b_terms: vec![t(0.1, 0.0, 0, 0, 1, 0), t(0.0, -0.05, 0, 1, 1, 0)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            StructureSpec::Standard {} => Ok(()),
            StructureSpec::Admissible { a_terms, b_terms } => {
                if a_terms.iter().chain(b_terms).any(|t| t.k + t.l == 0) {
                    return Err(Error::Config("admissible structure terms must carry w or w̄".into()));
                }
                Ok(())
            }
            StructureSpec::Perturbed { entries } => {
                if let Some(e) = entries.iter().find(|e| e.row > 3 || e.col > 3) {
                    return Err(Error::Config(format!("entry ({}, {}) outside a 4×4 matrix", e.row, e.col)));
                }
                Ok(())
            }
        }
    }

    pub fn try_at(&self, z: Complex64, w: Complex64) -> Result<RealMatrix> {
        match self {
            StructureSpec::Standard {} => Ok(j_st()),
            StructureSpec::Admissible { a_terms, b_terms } => {
                let a: Complex64 = a_terms.iter().map(|t| t.eval(z, w)).sum();
                let b: Complex64 = b_terms.iter().map(|t| t.eval(z, w)).sum();
                j_from_a(&ComplexMatrix::new(a, C0, b, C0))
            }
            StructureSpec::Perturbed { entries } => {
                let mut j = j_st();
                for e in entries {
                    j[(e.row, e.col)] += e.term.eval(z, w).re;
                }
                project_to_structure(&j)
            }
        }
    }
}

impl Structure for StructureSpec {
    /// Panics where the structure is undefined; sample through [`StructureField::sample`]
    /// to get an error instead.
    fn at(&self, z: Complex64, w: Complex64) -> RealMatrix {
        self.try_at(z, w).expect("structure undefined at sample point")
    }
}

/// Polar sampling of `D̄ × (1+γ)D̄`: `radii` levels from 0 to the outer radius
/// and `angles` equispaced angles in each factor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSpec {
    pub gamma: f64,
    pub radii: usize,
    pub angles: usize,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self { gamma: 0.5, radii: 6, angles: 12 }
    }
}

impl SampleSpec {
    pub fn points(&self) -> Result<Vec<(Complex64, Complex64)>> {
        if !(self.gamma > 0.0) || self.radii < 2 || self.angles < 1 {
            return Err(Error::Config(format!("invalid sample specification {self:?}")));
        }
        let polar = |outer: f64| -> Vec<Complex64> {
            let mut v = vec![C0];
            for ir in 1..self.radii {
                let r = outer * ir as f64 / (self.radii - 1) as f64;
                for it in 0..self.angles {
                    let t = 2.0 * std::f64::consts::PI * (it as f64 + 0.5 * (ir % 2) as f64) / self.angles as f64;
                    v.push(Complex64::from_polar(r, t));
                }
            }
            v
        };
        let zs = polar(1.0);
        let ws = polar(1.0 + self.gamma);
        Ok(zs.iter().flat_map(|&z| ws.iter().map(move |&w| (z, w))).collect())
    }
}

#[derive(Clone, Debug)]
pub struct StructureField {
    pub points: Vec<(Complex64, Complex64)>,
    pub values: Vec<RealMatrix>,
}

impl StructureField {
    pub fn sample(structure: &StructureSpec, spec: &SampleSpec) -> Result<Self> {
        structure.validate()?;
        let points = spec.points()?;
        let values = points.iter().map(|&(z, w)| structure.try_at(z, w)).collect::<Result<Vec<_>>>()?;
        Self::from_values(points, values)
    }

    pub fn sample_fn(structure: &impl Structure, spec: &SampleSpec) -> Result<Self> {
        let points = spec.points()?;
        let values = points.iter().map(|&(z, w)| structure.at(z, w)).collect();
        Self::from_values(points, values)
    }

    pub fn from_values(points: Vec<(Complex64, Complex64)>, values: Vec<RealMatrix>) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::Usage("point and value counts differ".into()));
        }
        for (p, j) in points.iter().zip(&values) {
            let d = square_defect(j);
            if !(d <= 1e-10) {
                return Err(Error::Construction(format!("J² ≠ −I at {p:?}: defect {d:.3e}")));
            }
        }
        Ok(Self { points, values })
    }

    /// Blocks `(J11, J12, J21, J22)` at sample `idx`.
    pub fn blocks(&self, idx: usize) -> [nalgebra::Matrix2<f64>; 4] {
        let j = &self.values[idx];
        [
            j.fixed_view::<2, 2>(0, 0).into_owned(),
            j.fixed_view::<2, 2>(0, 2).into_owned(),
            j.fixed_view::<2, 2>(2, 0).into_owned(),
            j.fixed_view::<2, 2>(2, 2).into_owned(),
        ]
    }
}

#[derive(Clone, Debug)]
pub struct AMatrixField {
    pub points: Vec<(Complex64, Complex64)>,
    pub values: Vec<ComplexMatrix>,
}

impl AMatrixField {
    /// `max |A_{·2}|` over samples.
    pub fn second_column_sup(&self) -> f64 {
        self.values.iter().map(|a| a[(0, 1)].norm().max(a[(1, 1)].norm())).fold(0.0, f64::max)
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().map(|a| a.iter().map(|e| e.norm()).fold(0.0, f64::max)).fold(0.0, f64::max)
    }
}

pub fn matrix_a_from_j(field: &StructureField) -> Result<AMatrixField> {
    let values = field
        .points
        .iter()
        .zip(&field.values)
        .map(|(p, j)| a_from_j(j).ok_or_else(|| Error::Degenerate(format!("J_st + J is singular at sample {p:?}"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(AMatrixField { points: field.points.clone(), values })
}

/// Rebuild the structure field from its `A` matrices.
pub fn structure_from_a(a: &AMatrixField) -> Result<StructureField> {
    let values = a.values.iter().map(j_from_a).collect::<Result<Vec<_>>>()?;
    StructureField::from_values(a.points.clone(), values)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    /// `max |J12|`
    pub j12: f64,
    /// `max |J22 − J_st|`
    pub j22: f64,
    /// `max |J11 − J_st|` on samples with `w = 0`
    pub j11_at_w0: f64,
    /// `max |J21|` on samples with `w = 0`
    pub j21_at_w0: f64,
    pub pass: bool,
    pub failing: Vec<String>,
}

pub const BLOCK_TOL: f64 = 1e-8;

pub fn verify_block_structure(field: &StructureField) -> BlockReport {
    let j = j2();
    let (mut j12, mut j22, mut j11, mut j21) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (idx, &(_, w)) in field.points.iter().enumerate() {
        let [b11, b12, b21, b22] = field.blocks(idx);
        j12 = j12.max(b12.abs().max());
        j22 = j22.max((b22 - j).abs().max());
        if w == C0 {
            j11 = j11.max((b11 - j).abs().max());
            j21 = j21.max(b21.abs().max());
        }
    }
    let failing: Vec<String> = [("J12", j12), ("J22", j22), ("J11(z,0)", j11), ("J21(z,0)", j21)]
        .iter()
        .filter(|(_, d)| !(*d <= BLOCK_TOL))
        .map(|(n, _)| n.to_string())
        .collect();
    BlockReport { j12, j22, j11_at_w0: j11, j21_at_w0: j21, pass: failing.is_empty(), failing }
}

/// Monomials `z^i z̄^j w^k w̄^l` of total degree ≤ `degree` with `k + l ≥ 1`.
pub fn fit_basis(degree: u32) -> Vec<(u32, u32, u32, u32)> {
    let mut out = Vec::new();
    for total in 1..=degree {
        for k in 0..=total {
            for l in 0..=(total - k) {
                if k + l == 0 {
                    continue;
                }
                for i in 0..=(total - k - l) {
                    out.push((i, total - k - l - i, k, l));
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub degree: u32,
    pub residual_a: f64,
    pub residual_b: f64,
    pub sup_a_samples: f64,
    pub sup_a_at_w0: f64,
    pub sup_b_at_w0: f64,
}

pub const FIT_TOL: f64 = 1e-7;

/// Least-squares fit of `a = A11`, `b = A21` by monomials carrying `w` or `w̄`.
pub fn coefficients_from_structure(
    field: &StructureField,
    gamma: f64,
    degree: u32,
) -> Result<(CoefficientPair, FitReport)> {
    let a_field = matrix_a_from_j(field)?;
    let basis = fit_basis(degree);
    let rows = field.points.len();
    let design = DMatrix::from_fn(rows, basis.len(), |r, c| {
        let (z, w) = field.points[r];
        let (i, j, k, l) = basis[c];
        MonomialTerm::new(Complex64::new(1.0, 0.0), i, j, k, l).eval(z, w)
    });
    let svd = design.clone().svd(true, true);
    let fit = |entry: (usize, usize)| -> Result<(Vec<MonomialTerm>, f64)> {
        let rhs = DVector::from_iterator(rows, a_field.values.iter().map(|a| a[entry]));
        let coef = svd.solve(&rhs, 1e-12).map_err(|e| Error::Degenerate(e.to_string()))?;
        let resid = (&design * &coef - &rhs).iter().map(|e| e.norm()).fold(0.0, f64::max);
        let terms = basis
            .iter()
            .zip(coef.iter())
            .filter(|(_, c)| c.norm() > 1e-13)
            .map(|(&(i, j, k, l), &c)| MonomialTerm::new(c, i, j, k, l))
            .collect();
        Ok((terms, resid))
    };
    let (a_terms, residual_a) = fit((0, 0))?;
    let (b_terms, residual_b) = fit((1, 0))?;
    let residual = residual_a.max(residual_b);
    if !(residual <= FIT_TOL) {
        return Err(Error::Approximation { residual, threshold: FIT_TOL });
    }
    let sup_a_samples = a_field.values.iter().map(|a| a[(0, 0)].norm()).fold(0.0, f64::max);
    if sup_a_samples >= 1.0 {
        return Err(Error::Ellipticity { sup_a: sup_a_samples });
    }
    let pair = CoefficientPair::with_measured_a0(a_terms, b_terms, gamma)?;
    let at_w0 = |f: &dyn Fn(Complex64) -> Complex64| {
        (0..64)
            .map(|i| {
                let z = Complex64::from_polar(1.0 - (i % 4) as f64 / 4.0, i as f64 * 0.37);
                f(z).norm()
            })
            .fold(0.0, f64::max)
    };
    let report = FitReport {
        degree,
        residual_a,
        residual_b,
        sup_a_samples,
        sup_a_at_w0: at_w0(&|z| pair.a(z, C0)),
        sup_b_at_w0: at_w0(&|z| pair.b(z, C0)),
    };
    Ok((pair, report))
}

/// `min |det(J + J_st)|` over samples.
pub fn nondegeneracy_check(field: &StructureField) -> f64 {
    field.values.iter().map(|j| (j + j_st()).determinant().abs()).fold(f64::INFINITY, f64::min)
}

pub const LEVI_STEP: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeviEstimate {
    pub value: f64,
    /// `|L(h) − L(h/2)|`
    pub richardson_gap: f64,
    pub reliable: bool,
}

/// `−d(J* du)(v, J(p) v)` by nested central differences with step `h`.
///
/// With constant fields `X = v`, `Y = J(p) v` the bracket vanishes, so
/// `dθ(X, Y) = X(θ(Y)) − Y(θ(X))` with `θ(Y)(q) = du(q)(J(q) Y)`.
pub fn levi_form_with_step(
    u: &impl Fn(&Vector4<f64>) -> f64,
    j: &impl Structure,
    p: &Vector4<f64>,
    v: &Vector4<f64>,
    h: f64,
) -> f64 {
    let x = *v;
    let y = j.at_real(p) * v;
    let theta = |q: &Vector4<f64>, field: &Vector4<f64>| {
        let dir = j.at_real(q) * field;
        (u(&(q + dir * h)) - u(&(q - dir * h))) / (2.0 * h)
    };
    let deriv = |along: &Vector4<f64>, field: &Vector4<f64>| {
        (theta(&(p + along * h), field) - theta(&(p - along * h), field)) / (2.0 * h)
    };
    -(deriv(&x, &y) - deriv(&y, &x))
}

pub fn levi_form(u: &impl Fn(&Vector4<f64>) -> f64, j: &impl Structure, p: &Vector4<f64>, v: &Vector4<f64>) -> f64 {
    levi_form_with_step(u, j, p, v, LEVI_STEP)
}

/// Levi form at `h` and `h/2`; flagged unreliable when they differ by more than `1e-3`.
pub fn levi_form_checked(
    u: &impl Fn(&Vector4<f64>) -> f64,
    j: &impl Structure,
    p: &Vector4<f64>,
    v: &Vector4<f64>,
    h: f64,
) -> LeviEstimate {
    let coarse = levi_form_with_step(u, j, p, v, h);
    let fine = levi_form_with_step(u, j, p, v, h / 2.0);
    let gap = (coarse - fine).abs();
    LeviEstimate { value: fine, richardson_gap: gap, reliable: gap <= 1e-3 * coarse.abs().max(1.0) }
}

/// Smallest eigenvalue of the Levi form at `J_st`, a Hermitian form in `v ∈ C²`
/// recovered by polarization.
pub fn levi_min_eigenvalue_st(u: &impl Fn(&Vector4<f64>) -> f64, p: &Vector4<f64>, h: f64) -> f64 {
    let st = |_: Complex64, _: Complex64| j_st();
    let l = |v: [f64; 4]| levi_form_with_step(u, &st, p, &Vector4::from(v), h);
    let h11 = l([1.0, 0.0, 0.0, 0.0]);
    let h22 = l([0.0, 0.0, 1.0, 0.0]);
    let re12 = (l([1.0, 0.0, 1.0, 0.0]) - h11 - h22) / 2.0;
    let im12 = (l([1.0, 0.0, 0.0, 1.0]) - h11 - h22) / 2.0;
    let off = re12.hypot(im12);
    (h11 + h22) / 2.0 - (((h11 - h22) / 2.0).powi(2) + off * off).sqrt()
}

/// The change `ξ = z + Σ_{k,j} a_kj z_k z̄_j` (each `a_kj ∈ C²`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizationMap {
    /// `coeffs[k][j]` is the vector `a_kj`.
    pub coeffs: [[[Complex64; 2]; 2]; 2],
}

impl NormalizationMap {
    pub fn identity() -> Self {
        Self { coeffs: [[[C0; 2]; 2]; 2] }
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.coeffs.iter().flatten().flatten().all(|c| c.norm() <= tol)
    }

    fn quadratic(&self, z: [Complex64; 2]) -> [Complex64; 2] {
        let mut out = [C0; 2];
        for k in 0..2 {
            for j in 0..2 {
                for (m, o) in out.iter_mut().enumerate() {
                    *o += self.coeffs[k][j][m] * z[k] * z[j].conj();
                }
            }
        }
        out
    }

    pub fn apply(&self, p: &Vector4<f64>) -> Vector4<f64> {
        let (z1, z2) = to_complex(p);
        let q = self.quadratic([z1, z2]);
        to_real(z1 + q[0], z2 + q[1])
    }

    /// Inverse by fixed-point iteration `p ← ξ − Q(p)`, valid near the origin.
    pub fn inverse(&self, xi: &Vector4<f64>) -> Result<Vector4<f64>> {
        let mut p = *xi;
        for _ in 0..200 {
            let next = xi - (self.apply(&p) - p);
            let step = (next - p).norm();
            p = next;
            if step < 1e-16 * (1.0 + xi.norm()) {
                return Ok(p);
            }
        }
        if (self.apply(&p) - xi).norm() < 1e-13 {
            Ok(p)
        } else {
            Err(Error::NonConvergence {
                stage: "normalization inverse",
                iterations: 200,
                last_ratio: f64::NAN,
                last_change: (self.apply(&p) - xi).norm(),
                history: vec![],
            })
        }
    }

    /// Real Jacobian of the map at `p`.
    pub fn jacobian(&self, p: &Vector4<f64>) -> RealMatrix {
        let (z1, z2) = to_complex(p);
        let z = [z1, z2];
        let mut d = RealMatrix::identity();
        for col in 0..4 {
            let var = col / 2;
            let imag = col % 2 == 1;
            // ∂(z_k z̄_j) along x_var or y_var
            let mut out = [C0; 2];
            for k in 0..2 {
                for j in 0..2 {
                    let dk = if k == var {
                        if imag {
                            Complex64::i()
                        } else {
                            Complex64::new(1.0, 0.0)
                        }
                    } else {
                        C0
                    };
                    let dj = if j == var {
                        if imag {
                            -Complex64::i()
                        } else {
                            Complex64::new(1.0, 0.0)
                        }
                    } else {
                        C0
                    };
                    let term = dk * z[j].conj() + z[k] * dj;
                    for (m, o) in out.iter_mut().enumerate() {
                        *o += self.coeffs[k][j][m] * term;
                    }
                }
            }
            d[(0, col)] += out[0].re;
            d[(1, col)] += out[0].im;
            d[(2, col)] += out[1].re;
            d[(3, col)] += out[1].im;
        }
        d
    }

    /// Pushforward `J'(ξ) = dΦ J dΦ^{-1}` evaluated at `Φ^{-1}(ξ)`.
    pub fn pushforward<'a, S: Structure>(&'a self, j: &'a S) -> impl Fn(Complex64, Complex64) -> RealMatrix + 'a {
        move |z, w| {
            let xi = to_real(z, w);
            let p = self.inverse(&xi).expect("normalization inverse near the origin");
            let d = self.jacobian(&p);
            let dinv = d.try_inverse().expect("normalization is a local diffeomorphism");
            d * j.at_real(&p) * dinv
        }
    }
}

/// `∂A/∂z_k(0)` for `k = 0, 1`, by fourth-order central differences of the extracted `A`.
pub fn a_z_at_origin(j: &impl Structure, h: f64) -> Result<[ComplexMatrix; 2]> {
    let a_at = |p: Vector4<f64>| {
        a_from_j(&j.at_real(&p)).ok_or_else(|| Error::Degenerate("J_st + J singular near the origin".into()))
    };
    let partial = |axis: usize| -> Result<ComplexMatrix> {
        let mut e = Vector4::zeros();
        e[axis] = h;
        let (p1, m1, p2, m2) = (a_at(e)?, a_at(-e)?, a_at(e * 2.0)?, a_at(-e * 2.0)?);
        Ok((m2 - p2 + (p1 - m1) * Complex64::new(8.0, 0.0)) / Complex64::new(12.0 * h, 0.0))
    };
    let mut out = [ComplexMatrix::zeros(); 2];
    for (k, o) in out.iter_mut().enumerate() {
        let dx = partial(2 * k)?;
        let dy = partial(2 * k + 1)?;
        *o = (dx - dy * Complex64::i()) * Complex64::new(0.5, 0.0);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizationReport {
    pub map: NormalizationMap,
    pub a_at_origin: f64,
    pub a_z_before: f64,
    /// `max |∂A'/∂z_k(0)|` re-extracted from the pushforward.
    pub a_z_after: f64,
}

pub const NORMALIZATION_TOL: f64 = 1e-6;

/// Quadratic change of coordinates killing `∂A/∂z(0)`, certified by re-extraction.
///
/// First-order matching of `∂ξ/∂ζ̄` along a disc through 0 gives
/// `a_kj = −(column j of ∂A/∂z_k(0))`.
pub fn normalize_coordinates(j: &impl Structure) -> Result<NormalizationReport> {
    let h = 1e-3;
    let a0 = a_from_j(&j.at_real(&Vector4::zeros()))
        .ok_or_else(|| Error::Degenerate("J_st + J singular at the origin".into()))?;
    let a0_norm = a0.iter().map(|e| e.norm()).fold(0.0, f64::max);
    if a0_norm > 1e-12 {
        return Err(Error::Usage(format!("A(0) must vanish before normalization, got {a0_norm:.3e}")));
    }
    let az = a_z_at_origin(j, h)?;
    let sup = |m: &[ComplexMatrix; 2]| m.iter().flat_map(|a| a.iter()).map(|e| e.norm()).fold(0.0, f64::max);
    let mut map = NormalizationMap::identity();
    for (k, dk) in az.iter().enumerate() {
        for jj in 0..2 {
            for m in 0..2 {
                map.coeffs[k][jj][m] = -dk[(m, jj)];
            }
        }
    }
    let after = sup(&a_z_at_origin(&map.pushforward(j), h)?);
    let report = NormalizationReport { map, a_at_origin: a0_norm, a_z_before: sup(&az), a_z_after: after };
    if !(after <= NORMALIZATION_TOL) {
        return Err(Error::Approximation { residual: after, threshold: NORMALIZATION_TOL });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn realification_matches_complex_arithmetic() {
        let m = ComplexMatrix::new(c(0.1, 0.2), c(-0.3, 0.05), c(0.0, 0.4), c(0.2, -0.1));
        let v = [c(0.7, -0.2), c(0.1, 0.9)];
        let rv = to_real(v[0], v[1]);
        let lin = m * nalgebra::Vector2::new(v[0], v[1]);
        let anti = m * nalgebra::Vector2::new(v[0].conj(), v[1].conj());
        assert!((realify_linear(&m) * rv - to_real(lin[0], lin[1])).norm() < 1e-15);
        assert!((realify_antilinear(&m) * rv - to_real(anti[0], anti[1])).norm() < 1e-15);
    }

    #[test]
    fn standard_structure_has_zero_a() {
        let a = a_from_j(&j_st()).unwrap();
        assert!(a.iter().all(|e| e.norm() == 0.0));
        assert!(square_defect(&j_st()) == 0.0);
        assert!(((j_st() * 2.0).determinant() - 16.0).abs() < 1e-12);
    }

    #[test]
    fn a_and_j_round_trip() {
        let a = ComplexMatrix::new(c(0.1, 0.2), c(-0.3, 0.05), c(0.0, 0.4), c(0.2, -0.1));
        let j = j_from_a(&a).unwrap();
        assert!(square_defect(&j) < 1e-14);
        let back = a_from_j(&j).unwrap();
        assert!((back - a).iter().all(|e| e.norm() < 1e-14));
    }

    #[test]
    fn projection_restores_square() {
        let mut j = j_st();
        j[(0, 2)] += 0.05;
        j[(3, 1)] -= 0.03;
        j[(1, 1)] += 0.02;
        let p = project_to_structure(&j).unwrap();
        assert!(square_defect(&p) < 1e-14);
        assert!((p - j).abs().max() < 0.1);
    }

    #[test]
    fn fit_basis_carries_w() {
        let b = fit_basis(3);
        assert_eq!(b.len(), 25);
        assert!(b.iter().all(|&(_, _, k, l)| k + l >= 1));
    }

    #[test]
    fn sample_points_include_w_zero_and_outer_ring() {
        let pts = SampleSpec::default().points().unwrap();
        assert!(pts.iter().any(|&(_, w)| w == C0));
        let max_w = pts.iter().map(|(_, w)| w.norm()).fold(0.0, f64::max);
        assert!((max_w - 1.5).abs() < 1e-12);
    }

    #[test]
    fn structure_spec_parses() {
        let json = r#"{"kind":"admissible","a_terms":[{"c":[0.1,0.0],"i":0,"j":0,"k":1,"l":0}],"b_terms":[]}"#;
        let s: StructureSpec = serde_json::from_str(json).unwrap();
        assert!(matches!(s, StructureSpec::Admissible { .. }));
        let bad = r#"{"kind":"standard","extra":1}"#;
        assert!(serde_json::from_str::<StructureSpec>(bad).is_err());
    }
}
