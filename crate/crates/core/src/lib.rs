//! Monodromy of balanced hypergeometric equations
//! `lambda prod(D - alpha_i) - z prod(D - beta_j)`, `D = z d/dz`, `lambda = (-1)^n`.

// `!(x > y)` guards are deliberate: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circle_solutions;
pub mod error;
pub mod exponents;
pub mod gammaprod;
pub mod jet;
pub mod linalg;
pub mod local_solutions;
pub mod matrices;
pub mod monodromy;
pub mod ode_oracle;
pub mod quadrature;
pub mod report;
pub mod scalar;

pub use error::{Error, Result};
pub use exponents::{group_exponents, Exponent, ExponentData, MultiplicityStructure, Side};
pub use linalg::{Axis, ComplexMatrix};
pub use report::{CheckResult, VerificationReport};
pub use scalar::{ComplexExt, Real};

pub type Complex64 = num_complex::Complex<f64>;
pub type Complex32 = num_complex::Complex<f32>;
pub type Matrix64 = ComplexMatrix<f64>;
pub type Matrix32 = ComplexMatrix<f32>;

/// Quad-precision scalar of the extended mode.
#[cfg(feature = "extended")]
pub type Real128 = f128::f128;
#[cfg(feature = "extended")]
pub type Complex128 = num_complex::Complex<f128::f128>;
