//! Truncated Taylor arithmetic in one complex variable.
//!
//! A [`Taylor`] of order `k` stores `a_0..a_k` with `f(t0 + e) = sum a_j e^j`.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::{factorial, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct Taylor<T: Real> {
    pub coeffs: Vec<Complex<T>>,
}

impl<T: Real> Taylor<T> {
    pub fn zero(order: usize) -> Self {
        Taylor { coeffs: vec![Complex::zero(); order + 1] }
    }

    pub fn constant(c: Complex<T>, order: usize) -> Self {
        let mut t = Self::zero(order);
        t.coeffs[0] = c;
        t
    }

    /// `c + slope * e`.
    pub fn linear(c: Complex<T>, slope: Complex<T>, order: usize) -> Self {
        let mut t = Self::constant(c, order);
        if order >= 1 {
            t.coeffs[1] = slope;
        }
        t
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn value(&self) -> Complex<T> {
        self.coeffs[0]
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        Taylor { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    pub fn add_const(mut self, c: Complex<T>) -> Self {
        self.coeffs[0] = self.coeffs[0] + c;
        self
    }

    /// Reciprocal; requires a nonzero constant term.
    pub fn recip(&self) -> Self {
        let k = self.order();
        let mut b = vec![Complex::zero(); k + 1];
        let inv0 = Complex::<T>::one() / self.coeffs[0];
        b[0] = inv0;
        for m in 1..=k {
            let mut s = Complex::<T>::zero();
            for j in 1..=m {
                s = s + self.coeffs[j] * b[m - j];
            }
            b[m] = -s * inv0;
        }
        Taylor { coeffs: b }
    }

    pub fn div(&self, other: &Self) -> Self {
        self * &other.recip()
    }

    pub fn exp(&self) -> Self {
        let k = self.order();
        let mut b = vec![Complex::zero(); k + 1];
        b[0] = self.coeffs[0].exp();
        for m in 1..=k {
            let mut s = Complex::<T>::zero();
            for j in 1..=m {
                s = s + self.coeffs[j] * b[m - j] * T::from_usize_lossy(j);
            }
            b[m] = s / T::from_usize_lossy(m);
        }
        Taylor { coeffs: b }
    }

    /// Logarithm with the principal branch for the constant term.
    pub fn ln(&self) -> Self {
        let k = self.order();
        let a0 = self.coeffs[0];
        let mut b = vec![Complex::zero(); k + 1];
        b[0] = a0.ln();
        for m in 1..=k {
            let mut s = Complex::<T>::zero();
            for (j, bj) in b.iter().enumerate().take(m).skip(1) {
                s = s + *bj * self.coeffs[m - j] * T::from_usize_lossy(j);
            }
            b[m] = (self.coeffs[m] - s / T::from_usize_lossy(m)) / a0;
        }
        Taylor { coeffs: b }
    }

    /// `ln(c + slope e)` in closed form.
    pub fn ln_linear(c: Complex<T>, slope: Complex<T>, order: usize) -> Self {
        let mut t = Self::zero(order);
        t.coeffs[0] = c.ln();
        let q = slope / c;
        let mut p = Complex::one();
        for j in 1..=order {
            p = p * q;
            let sign = if j % 2 == 1 { T::one() } else { -T::one() };
            t.coeffs[j] = p * (sign / T::from_usize_lossy(j));
        }
        t
    }

    /// `1 / (c + slope e)` in closed form.
    pub fn recip_linear(c: Complex<T>, slope: Complex<T>, order: usize) -> Self {
        let mut t = Self::zero(order);
        let inv = Complex::<T>::one() / c;
        let q = -slope * inv;
        let mut p = inv;
        for j in 0..=order {
            t.coeffs[j] = p;
            p = p * q;
        }
        t
    }

    /// `sin(a + w e)`.
    pub fn sin_linear(a: Complex<T>, w: Complex<T>, order: usize) -> Self {
        let (s, c) = (a.sin(), a.cos());
        let mut t = Self::zero(order);
        let mut p = Complex::one();
        for j in 0..=order {
            let d = match j % 4 {
                0 => s,
                1 => c,
                2 => -s,
                _ => -c,
            };
            t.coeffs[j] = d * p / factorial::<T>(j);
            p = p * w;
        }
        t
    }

    /// `sin(w e) / (w e)`, an even series starting at 1.
    pub fn sinc_linear(w: Complex<T>, order: usize) -> Self {
        let mut t = Self::zero(order);
        let w2 = w * w;
        let mut p = Complex::one();
        let mut j = 0;
        while j <= order {
            let sign = if (j / 2) % 2 == 0 { T::one() } else { -T::one() };
            t.coeffs[j] = p * (sign / factorial::<T>(j + 1));
            p = p * w2;
            j += 2;
        }
        t
    }

    /// `(c + e)^k` for a non-negative integer power.
    pub fn linear_pow(c: Complex<T>, k: usize, order: usize) -> Self {
        let base = Self::linear(c, Complex::one(), order);
        let mut acc = Self::constant(Complex::one(), order);
        for _ in 0..k {
            acc = &acc * &base;
        }
        acc
    }

    /// Drops the first `k` coefficients: `f(e) / e^k`, padding with zeros.
    pub fn shift_down(&self, k: usize) -> Self {
        let n = self.coeffs.len();
        let mut coeffs = vec![Complex::zero(); n];
        if k < n {
            coeffs[..n - k].copy_from_slice(&self.coeffs[k..]);
        }
        Taylor { coeffs }
    }

    /// Multiplies by `e^k`, truncating at the current order.
    pub fn shift_up(&self, k: usize) -> Self {
        let n = self.coeffs.len();
        let mut coeffs = vec![Complex::zero(); n];
        if k < n {
            coeffs[k..].copy_from_slice(&self.coeffs[..n - k]);
        }
        Taylor { coeffs }
    }

    /// `r!/(2 pi i)^r a_r`, the derivatives with respect to `t/(2 pi i)`.
    pub fn normalized_derivatives(&self) -> Vec<Complex<T>> {
        let two_pi_i = Complex::new(T::zero(), T::TAU());
        let mut scale = Complex::one();
        self.coeffs
            .iter()
            .enumerate()
            .map(|(r, a)| {
                let v = a * scale * factorial::<T>(r);
                scale = scale / two_pi_i;
                v
            })
            .collect()
    }
}

impl<T: Real> Add for &Taylor<T> {
    type Output = Taylor<T>;
    fn add(self, rhs: Self) -> Taylor<T> {
        Taylor { coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect() }
    }
}

impl<T: Real> Sub for &Taylor<T> {
    type Output = Taylor<T>;
    fn sub(self, rhs: Self) -> Taylor<T> {
        Taylor { coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect() }
    }
}

impl<T: Real> Neg for &Taylor<T> {
    type Output = Taylor<T>;
    fn neg(self) -> Taylor<T> {
        Taylor { coeffs: self.coeffs.iter().map(|a| -a).collect() }
    }
}

impl<T: Real> Mul for &Taylor<T> {
    type Output = Taylor<T>;
    fn mul(self, rhs: Self) -> Taylor<T> {
        let k = self.order().min(rhs.order());
        let mut c = vec![Complex::zero(); k + 1];
        for i in 0..=k {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..=(k - i) {
                c[i + j] = c[i + j] + self.coeffs[i] * rhs.coeffs[j];
            }
        }
        Taylor { coeffs: c }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex<f64> {
        Complex::new(x, 0.0)
    }

    #[test]
    fn exp_of_linear_matches_series() {
        let t = Taylor::linear(c(0.0), c(1.0), 4).exp();
        let want = [1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0];
        for (a, w) in t.coeffs.iter().zip(want) {
            assert!((a.re - w).abs() < 1e-15 && a.im.abs() < 1e-15);
        }
    }

    #[test]
    fn ln_inverts_exp() {
        let x = Taylor { coeffs: vec![c(0.3), Complex::new(0.1, 0.2), c(-0.7), c(0.05)] };
        let y = x.exp().ln();
        for (a, b) in x.coeffs.iter().zip(&y.coeffs) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn closed_forms_agree_with_generic_ops() {
        let a = Complex::new(1.3, -0.4);
        let s = c(-1.0);
        let lin = Taylor::linear(a, s, 5);
        for (x, y) in Taylor::ln_linear(a, s, 5).coeffs.iter().zip(&lin.ln().coeffs) {
            assert!((x - y).norm() < 1e-14);
        }
        for (x, y) in Taylor::recip_linear(a, s, 5).coeffs.iter().zip(&lin.recip().coeffs) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn sinc_times_argument_is_sin() {
        let w = c(std::f64::consts::PI);
        let sinc = Taylor::sinc_linear(w, 6);
        let sin = Taylor::sin_linear(c(0.0), w, 6);
        let prod = sinc.shift_up(1).scale(w);
        for (x, y) in prod.coeffs.iter().zip(&sin.coeffs) {
            assert!((x - y).norm() < 1e-13);
        }
    }

    #[test]
    fn normalized_derivatives_of_exponential() {
        // e^{2 pi i t}: every normalized derivative equals 1 at t = 0.
        let t = Taylor::linear(c(0.0), Complex::new(0.0, std::f64::consts::TAU), 5).exp();
        for d in t.normalized_derivatives() {
            assert!((d - c(1.0)).norm() < 1e-12);
        }
    }
}
