//! Numerical machinery for pseudoholomorphic discs attached to the standard torus.
//!
//! The crate is split along the lines of the computation:
//!
//! * [`discfield`]: polar discretization of the closed unit disc, complex fields,
//!   spectral derivatives, quadrature and norms.
//! * [`transforms`]: the Cauchy-Green, Ahlfors-Beurling and Bergman operators and
//!   their boundary-adapted variants `T0`, `R0`, plus operator-norm probes.
//! * [`beltrami`]: the fixed-point solver for the quasilinear Beltrami system
//!   `∂z/∂ζ̄ = a(z,w)·∂z̄/∂ζ̄`, `∂w/∂ζ̄ = b(z,w)·∂z̄/∂ζ̄` and disc diagnostics.
//! * [`acstructure`]: almost complex structures on the bidisc, the `A` matrix of the
//!   Cauchy-Riemann system, Levi forms and coordinate normalization.
//! * [`morse`]: Takagi factorization, the plurisubharmonic Morse normal form,
//!   slow cut-off functions and crossing profiles.

// Negated comparisons are how NaN inputs fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acstructure;
pub mod beltrami;
pub mod discfield;
pub mod error;
pub mod morse;
pub mod quadrature;
pub mod transforms;

pub use error::{Error, Result};
pub use num_complex::Complex64;
