//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All algorithms are written against [`Real`] so that the same code runs in
//! `f32`, `f64`, and (with the `extended` feature) 113-bit quad precision.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar usable by the solvers.
pub trait Real: Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static {
    /// Short name used in reports (`"f64"`, `"f128"`, ...).
    const NAME: &'static str;
    /// Stirling series is evaluated only once the real part of the argument
    /// has been shifted past this threshold.
    const STIRLING_SHIFT: f64;
    /// Number of Bernoulli correction terms in the Stirling series.
    const STIRLING_TERMS: usize;

    /// Converts an `f64` literal. Every `Real` can represent all finite `f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(k: usize) -> Self {
        Self::lit(k as f64)
    }

    #[inline]
    fn from_i64_lossy(k: i64) -> Self {
        Self::lit(k as f64)
    }

    /// Exact ratio `num / den` for integer literals of moderate size.
    fn ratio(num: i128, den: i128) -> Self {
        split_i128::<Self>(num) / split_i128::<Self>(den)
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

// Builds the value of an i128 from 30-bit chunks so that the conversion is
// exact whenever the target precision allows it.
fn split_i128<T: Real>(n: i128) -> T {
    let neg = n < 0;
    let mut m = n.unsigned_abs();
    let chunk = T::lit((1u64 << 30) as f64);
    let mut acc = T::zero();
    let mut scale = T::one();
    while m > 0 {
        let part = (m & ((1u128 << 30) - 1)) as f64;
        acc = acc + T::lit(part) * scale;
        scale = scale * chunk;
        m >>= 30;
    }
    if neg {
        -acc
    } else {
        acc
    }
}

impl Real for f32 {
    const NAME: &'static str = "f32";
    const STIRLING_SHIFT: f64 = 8.0;
    const STIRLING_TERMS: usize = 6;
}

impl Real for f64 {
    const NAME: &'static str = "f64";
    const STIRLING_SHIFT: f64 = 12.0;
    const STIRLING_TERMS: usize = 12;
}

#[cfg(feature = "extended")]
impl Real for f128::f128 {
    const NAME: &'static str = "f128";
    const STIRLING_SHIFT: f64 = 24.0;
    const STIRLING_TERMS: usize = 24;
}

/// Complex helper constructors.
pub trait ComplexExt<T: Real> {
    fn real(x: T) -> Self;
    fn from_f64(re: f64, im: f64) -> Self;
    fn i() -> Self;
    fn two_pi_i() -> Self;
    fn abs(&self) -> T;
    fn to_pair(&self) -> [f64; 2];
    fn is_finite_c(&self) -> bool;
}

impl<T: Real> ComplexExt<T> for Complex<T> {
    #[inline]
    fn real(x: T) -> Self {
        Complex::new(x, T::zero())
    }
    #[inline]
    fn from_f64(re: f64, im: f64) -> Self {
        Complex::new(T::lit(re), T::lit(im))
    }
    #[inline]
    fn i() -> Self {
        Complex::new(T::zero(), T::one())
    }
    #[inline]
    fn two_pi_i() -> Self {
        Complex::new(T::zero(), T::TAU())
    }
    #[inline]
    fn abs(&self) -> T {
        self.norm()
    }
    fn to_pair(&self) -> [f64; 2] {
        [self.re.to_f64_lossy(), self.im.to_f64_lossy()]
    }
    fn is_finite_c(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// `e^{2 pi i x}` for a real `x`, reduced to `[0, 1)` first and exact at
/// multiples of `1/4`.
pub fn unit_root<T: Real>(x: T) -> Complex<T> {
    let frac = x - x.floor();
    let four = T::lit(4.0);
    let q = frac * four;
    if q == q.round() {
        let k = q.round().to_i64().unwrap_or(0).rem_euclid(4);
        let (re, im) = match k {
            0 => (1.0, 0.0),
            1 => (0.0, 1.0),
            2 => (-1.0, 0.0),
            _ => (0.0, -1.0),
        };
        return Complex::new(T::lit(re), T::lit(im));
    }
    let theta = T::TAU() * frac;
    Complex::new(theta.cos(), theta.sin())
}

/// Binomial coefficient as a scalar.
pub fn binomial<T: Real>(n: usize, k: usize) -> T {
    if k > n {
        return T::zero();
    }
    let k = k.min(n - k);
    let mut acc = T::one();
    for i in 0..k {
        acc = acc * T::from_usize_lossy(n - i) / T::from_usize_lossy(i + 1);
    }
    acc.round()
}

pub fn factorial<T: Real>(n: usize) -> T {
    (1..=n).fold(T::one(), |acc, k| acc * T::from_usize_lossy(k))
}

/// `c^k` with the convention `0^0 = 1`.
pub fn powi_c<T: Real>(c: Complex<T>, k: i64) -> Complex<T> {
    if k == 0 {
        return Complex::new(T::one(), T::zero());
    }
    let base = if k < 0 { Complex::new(T::one(), T::zero()) / c } else { c };
    let mut e = k.unsigned_abs();
    let mut acc = Complex::new(T::one(), T::zero());
    let mut b = base;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b;
        }
        b = b * b;
        e >>= 1;
    }
    acc
}

/// `x^k` for real `x` and non-negative `k` with `0^0 = 1`.
pub fn powu<T: Real>(x: T, k: usize) -> T {
    (0..k).fold(T::one(), |acc, _| acc * x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_root_is_exact_on_quarters() {
        assert_eq!(unit_root(0.25f64), Complex::new(0.0, 1.0));
        assert_eq!(unit_root(-0.5f64), Complex::new(-1.0, 0.0));
        assert_eq!(unit_root(7.0f64), Complex::new(1.0, 0.0));
        let z = unit_root(1.0f64 / 3.0);
        assert!((z.re + 0.5).abs() < 1e-15);
        assert!((z.im - 3f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn ratio_converts_large_numerators() {
        let v = f64::ratio(-26315271553053477373, 2418179400);
        assert!((v + 1.088_226_603_578_439e10).abs() / 1.088e10 < 1e-14);
    }

    #[test]
    fn powi_zero_zero_is_one() {
        let z = Complex::new(0.0f64, 0.0);
        assert_eq!(powi_c(z, 0), Complex::new(1.0, 0.0));
        assert_eq!(powu(0.0f64, 0), 1.0);
        assert_eq!(powi_c(Complex::new(2.0f64, 0.0), -2), Complex::new(0.25, 0.0));
    }

    #[test]
    fn binomial_small_table() {
        assert_eq!(binomial::<f64>(4, 2), 6.0);
        assert_eq!(binomial::<f64>(2, 3), 0.0);
        assert_eq!(binomial::<f64>(10, 0), 1.0);
    }

    #[cfg(feature = "extended")]
    #[test]
    fn quad_ratio_is_tighter_than_double() {
        use f128::f128;
        let third = f128::ratio(1, 3);
        let err = (third * f128::lit(3.0) - <f128 as num_traits::One>::one()).abs();
        assert!(err.to_f64_lossy() < 1e-32);
    }
}
