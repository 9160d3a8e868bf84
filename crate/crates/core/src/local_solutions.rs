//! Local solution bases `S_{A_j,r}` at 0 and `S_{B_j,r}` at infinity as
//! log-power series with balanced-gamma coefficients.
//!
//! Points are given on the universal cover of the punctured plane through
//! their logarithm, so analytic continuation around 0 is a shift of `arg z`.

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{group_exponents, Exponent, ExponentData, Side};
use crate::gammaprod::{balanced_gamma_logjet, Jet};
use crate::jet::Taylor;
use crate::linalg::ComplexMatrix;
use crate::scalar::{binomial, ComplexExt, Real};

/// Hard cap on the number of series terms.
pub const MAX_TERMS: usize = 100_000;
/// Consecutive negligible terms required before stopping.
const TAIL_RUN: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesSide {
    Zero,
    Infinity,
}

impl SeriesSide {
    pub fn exponent_side(self) -> Side {
        match self {
            SeriesSide::Zero => Side::Alpha,
            SeriesSide::Infinity => Side::Beta,
        }
    }

    // exponent of z in the l-th term is sign * l + t
    fn sign(self) -> i64 {
        match self {
            SeriesSide::Zero => 1,
            SeriesSide::Infinity => -1,
        }
    }
}

/// A point on the universal cover: `log z = ln|z| + i arg z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoverPoint<T: Real> {
    pub log: Complex<T>,
}

impl<T: Real> CoverPoint<T> {
    pub fn polar(rho: T, arg: T) -> Self {
        CoverPoint { log: Complex::new(rho.ln(), arg) }
    }

    /// `z` together with a chosen `arg z`, which must agree with `z` modulo `2 pi`.
    pub fn new(z: Complex<T>, arg: Option<T>) -> Result<Self> {
        let arg = arg.ok_or(Error::BranchRequired)?;
        let rho = z.norm();
        if rho.is_zero() || !rho.is_finite() {
            return Err(Error::Precondition("z must be finite and nonzero".into()));
        }
        let w = Complex::new(rho, T::zero()) * Complex::new(arg.cos(), arg.sin());
        if (w - z).norm() > T::lit(1e-9) * rho {
            return Err(Error::Precondition(format!("arg {} is not an argument of z = {}", arg.to_f64_lossy(), z)));
        }
        Ok(Self::polar(rho, arg))
    }

    pub fn z(&self) -> Complex<T> {
        self.log.exp()
    }

    pub fn modulus(&self) -> T {
        self.log.re.exp()
    }

    pub fn arg(&self) -> T {
        self.log.im
    }

    /// The same point after `k` counterclockwise turns around 0.
    pub fn turned(&self, k: i64) -> Self {
        CoverPoint { log: self.log + Complex::new(T::zero(), T::TAU() * T::from_i64_lossy(k)) }
    }
}

/// Truncated data of one basis series.
#[derive(Clone, Debug)]
pub struct SolutionSeries<T: Real> {
    pub side: SeriesSide,
    /// 1-based class index.
    pub j: usize,
    pub r: usize,
    pub representative: Exponent,
    pub nu: T,
    pub truncation: usize,
    /// Normalized jets of `G(sign * l + t)` at `t = nu` for `l = 0..=truncation`.
    pub jets: Vec<Jet<T>>,
    alpha: Vec<T>,
    beta: Vec<T>,
}

impl<T: Real> SolutionSeries<T> {
    fn taylor(&self, l: usize) -> Taylor<T> {
        let s = self.side.sign() * l as i64;
        balanced_gamma_logjet(&self.alpha, &self.beta, Complex::real(self.nu), s, self.r).to_taylor()
    }

    fn nu_plus(&self, l: usize) -> Complex<T> {
        Complex::real(self.nu + T::from_i64_lossy(self.side.sign() * l as i64))
    }

    /// `D^k` of the `l`-th term for `k = 0..=k_max`.
    fn term(&self, taylor: &Taylor<T>, l: usize, point: &CoverPoint<T>, k_max: usize) -> Vec<Complex<T>> {
        let e = self.nu_plus(l);
        let zpow = (e * point.log).exp();
        let lz = point.log / Complex::<T>::two_pi_i();
        let mut lz_pows = vec![Complex::<T>::one(); self.r + 1];
        for p in 1..=self.r {
            lz_pows[p] = lz_pows[p - 1] * lz;
        }
        let lin = Taylor::linear(e, Complex::one(), self.r);
        let mut t = taylor.clone();
        let mut out = Vec::with_capacity(k_max + 1);
        for k in 0..=k_max {
            if k > 0 {
                t = &t * &lin;
            }
            let c = t.normalized_derivatives();
            let mut acc = Complex::<T>::zero();
            for p in 0..=self.r {
                acc = acc + c[self.r - p] * lz_pows[p] * binomial::<T>(self.r, p);
            }
            out.push(acc * zpow);
        }
        out
    }

    fn check_region(&self, point: &CoverPoint<T>) -> Result<()> {
        let rho = point.modulus();
        let inside = match self.side {
            SeriesSide::Zero => rho < T::one(),
            SeriesSide::Infinity => rho > T::one(),
        };
        if inside {
            Ok(())
        } else {
            Err(Error::OutsideConvergence(format!("{}", point.z())))
        }
    }

    /// `(S, DS, .., D^{k_max} S)` at `point`, summed until 5 consecutive
    /// terms are negligible.
    pub fn eval_derivatives(&self, point: &CoverPoint<T>, k_max: usize) -> Result<Vec<Complex<T>>> {
        self.check_region(point)?;
        let tol = T::epsilon() * T::lit(45.0);
        let min_terms = self.alpha.len() + TAIL_RUN;
        let mut sum = vec![Complex::<T>::zero(); k_max + 1];
        let mut quiet = 0;
        for l in 0..MAX_TERMS {
            let taylor = if l <= self.truncation { jet_to_taylor(&self.jets[l]) } else { self.taylor(l) };
            let term = self.term(&taylor, l, point, k_max);
            let mut small = true;
            for (s, t) in sum.iter_mut().zip(&term) {
                *s = *s + t;
                if t.norm() > tol * s.norm() {
                    small = false;
                }
            }
            quiet = if small { quiet + 1 } else { 0 };
            if quiet >= TAIL_RUN && l + 1 >= min_terms {
                return Ok(sum);
            }
            if !sum.iter().all(ComplexExt::is_finite_c) {
                return Err(Error::Convergence(l));
            }
        }
        Err(Error::Convergence(MAX_TERMS))
    }

    /// Sum of the first `terms` terms and their `D`-derivatives.
    pub fn eval_truncated(&self, point: &CoverPoint<T>, terms: usize, k_max: usize) -> Vec<Complex<T>> {
        let mut sum = vec![Complex::<T>::zero(); k_max + 1];
        for l in 0..terms {
            let taylor = if l <= self.truncation { jet_to_taylor(&self.jets[l]) } else { self.taylor(l) };
            for (s, t) in sum.iter_mut().zip(self.term(&taylor, l, point, k_max)) {
                *s = *s + t;
            }
        }
        sum
    }
}

// inverse of `normalized_derivatives`
fn jet_to_taylor<T: Real>(jet: &Jet<T>) -> Taylor<T> {
    let two_pi_i = Complex::<T>::two_pi_i();
    let mut scale = Complex::<T>::one();
    let mut fact = T::one();
    let coeffs = jet
        .coefficients
        .iter()
        .enumerate()
        .map(|(r, c)| {
            if r > 0 {
                scale = scale * two_pi_i;
                fact = fact * T::from_usize_lossy(r);
            }
            c * scale / fact
        })
        .collect();
    Taylor { coeffs }
}

/// The `n` series of one side, in the order of the multiplicity structure.
pub fn build_basis<T: Real>(data: &ExponentData, side: SeriesSide, truncation: usize) -> Vec<SolutionSeries<T>> {
    let ms = group_exponents::<T>(data, side.exponent_side());
    let alpha = data.alpha_real::<T>();
    let beta = data.beta_real::<T>();
    let mut out = Vec::with_capacity(data.n());
    for (j, r) in ms.pairs() {
        let representative = ms.representatives[j - 1].clone().expect("grouped structure");
        let nu = representative.to_real::<T>();
        let jets = (0..=truncation)
            .map(|l| {
                let s = side.sign() * l as i64;
                let t = balanced_gamma_logjet(&alpha, &beta, Complex::real(nu), s, r).to_taylor();
                Jet { t0: nu, coefficients: t.normalized_derivatives() }
            })
            .collect();
        out.push(SolutionSeries {
            side,
            j,
            r,
            representative,
            nu,
            truncation,
            jets,
            alpha: alpha.clone(),
            beta: beta.clone(),
        });
    }
    out
}

/// Default truncation used when building bases.
pub const DEFAULT_TRUNCATION: usize = 64;

pub fn eval_series<T: Real>(s: &SolutionSeries<T>, point: &CoverPoint<T>) -> Result<Complex<T>> {
    Ok(s.eval_derivatives(point, 0)?[0])
}

/// Matrix with rows `D^k` (`k = 0..n-1`) and one column per basis series.
pub fn wronskian<T: Real>(basis: &[SolutionSeries<T>], point: &CoverPoint<T>) -> Result<ComplexMatrix<T>> {
    let n = basis.len();
    let mut w = ComplexMatrix::zeros(n);
    for (col, s) in basis.iter().enumerate() {
        for (k, v) in s.eval_derivatives(point, n - 1)?.into_iter().enumerate() {
            w[(k, col)] = v;
        }
    }
    Ok(w)
}

/// Coefficients of `prod (x - x_i)`, lowest degree first.
pub(crate) fn expand_roots<T: Real>(xs: &[T]) -> Vec<T> {
    let mut p = vec![T::one()];
    for &x in xs {
        let mut next = vec![T::zero(); p.len() + 1];
        for (k, &c) in p.iter().enumerate() {
            next[k + 1] = next[k + 1] + c;
            next[k] = next[k] - c * x;
        }
        p = next;
    }
    p
}

/// Relative defect of the jet-valued recurrence
/// `G(s) prod(s - alpha_i) = G(s-1) prod(-(s-1) + beta_i)` at
/// `s = sign * l + nu` for every class of the given side, with jets of order
/// `m_j - 1`.
pub fn coefficient_recurrence_residual<T: Real>(data: &ExponentData, side: SeriesSide, l: i64) -> T {
    let ms = group_exponents::<T>(data, side.exponent_side());
    let alpha = data.alpha_real::<T>();
    let beta = data.beta_real::<T>();
    let shift = side.sign() * l;
    let mut worst = T::zero();
    for (rep, &m) in ms.representatives.iter().zip(&ms.multiplicities) {
        let nu = rep.as_ref().expect("grouped structure").to_real::<T>();
        let order = m.max(2) - 1;
        let s0 = Complex::real(nu + T::from_i64_lossy(shift));
        let mut lhs = balanced_gamma_logjet(&alpha, &beta, Complex::real(nu), shift, order).to_taylor();
        for &a in &alpha {
            lhs = &lhs * &Taylor::linear(s0 - a, Complex::one(), order);
        }
        let mut rhs = balanced_gamma_logjet(&alpha, &beta, Complex::real(nu), shift - 1, order).to_taylor();
        for &b in &beta {
            rhs = &rhs * &Taylor::linear(-(s0 - T::one()) + b, -Complex::<T>::one(), order);
        }
        let mut num = T::zero();
        let mut den = T::min_positive_value();
        for (x, y) in lhs.coeffs.iter().zip(&rhs.coeffs) {
            num = num.max((x - y).norm());
            den = den.max(x.norm() + y.norm());
        }
        worst = worst.max(num / den);
    }
    worst
}

/// Relative residual of `lambda prod(D - alpha) u - z prod(D - beta) u` for the
/// truncated series, from its `D`-derivatives at `point`.
pub fn operator_residual<T: Real>(
    data: &ExponentData,
    s: &SolutionSeries<T>,
    point: &CoverPoint<T>,
    terms: usize,
) -> T {
    let n = data.n();
    let d = s.eval_truncated(point, terms, n);
    let a = expand_roots(&data.alpha_real::<T>());
    let b = expand_roots(&data.beta_real::<T>());
    let lambda = data.lambda::<T>();
    let z = point.z();
    let mut res = Complex::<T>::zero();
    let mut scale = T::zero();
    for k in 0..=n {
        let p = lambda * d[k] * a[k];
        let q = z * d[k] * b[k];
        res = res + p - q;
        scale = scale + p.norm() + q.norm();
    }
    res.norm() / scale.max(T::min_positive_value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn n1_leading_coefficient() {
        let d = ExponentData::parse("0", "1/2").unwrap();
        let b = build_basis::<f64>(&d, SeriesSide::Zero, 10);
        assert_eq!(b.len(), 1);
        assert!((b[0].jets[0].coefficients[0] - c(2.0 / PI.sqrt(), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn resonant_basis_has_two_members() {
        let d = ExponentData::parse("0,0", "1/4,1/2").unwrap();
        let b = build_basis::<f64>(&d, SeriesSide::Zero, 10);
        assert_eq!(b.iter().map(|s| (s.j, s.r)).collect::<Vec<_>>(), vec![(1, 0), (1, 1)]);
        let d = ExponentData::parse("0,1/2", "1/3,4/3").unwrap();
        let b = build_basis::<f64>(&d, SeriesSide::Infinity, 10);
        assert_eq!(b.len(), 2);
        assert!(b.iter().all(|s| s.representative.text == "4/3"));
    }

    #[test]
    fn branch_is_required() {
        assert!(matches!(CoverPoint::new(c(0.25, 0.0), None), Err(Error::BranchRequired)));
        assert!(CoverPoint::new(c(0.25, 0.0), Some(2.0 * PI)).is_ok());
        assert!(CoverPoint::new(c(0.25, 0.0), Some(1.0)).is_err());
    }

    #[test]
    fn n1_series_is_binomial() {
        // S = sum 0.25^l / (Gamma(l+1) Gamma(3/2-l)) = (1+z)^{1/2} / Gamma(3/2)
        let d = ExponentData::parse("0", "1/2").unwrap();
        let b = build_basis::<f64>(&d, SeriesSide::Zero, 10);
        let z = 0.25;
        let v = eval_series(&b[0], &CoverPoint::polar(z, 0.0)).unwrap();
        let want = (1.0f64 + z).sqrt() * 2.0 / PI.sqrt();
        assert!((v - c(want, 0.0)).norm() < 1e-13, "{v} vs {want}");
    }

    #[test]
    fn small_z_limit() {
        let d = ExponentData::parse("1/3,1/2", "1/4,3/4").unwrap();
        let b = build_basis::<f64>(&d, SeriesSide::Zero, 10);
        for s in &b {
            let rho = 1e-9;
            let v = eval_series(s, &CoverPoint::polar(rho, 0.0)).unwrap() / rho.powf(s.nu);
            assert!((v - s.jets[0].coefficients[0]).norm() < 1e-7);
        }
    }

    #[test]
    fn monodromy_action_at_zero() {
        let d = ExponentData::parse("0,0,1/3", "1/4,1/2,3/4").unwrap();
        let ms = group_exponents::<f64>(&d, Side::Alpha);
        let b = build_basis::<f64>(&d, SeriesSide::Zero, 40);
        let p = CoverPoint::polar(0.5, 0.3);
        let vals: Vec<_> = b.iter().map(|s| eval_series(s, &p).unwrap()).collect();
        for (idx, s) in b.iter().enumerate() {
            let after = eval_series(s, &p.turned(1)).unwrap();
            let a = ms.values[s.j - 1];
            let mut want = c(0.0, 0.0);
            for q in 0..=s.r {
                let pos = ms.position(s.j, q).unwrap();
                want += vals[pos] * binomial::<f64>(s.r, q);
            }
            want *= a;
            assert!((after - want).norm() < 1e-12 * (1.0 + want.norm()), "series {idx}");
        }
    }

    #[test]
    fn recurrence_residuals() {
        let d = ExponentData::parse("0", "1/2").unwrap();
        assert!(coefficient_recurrence_residual::<f64>(&d, SeriesSide::Zero, 3) <= 1e-12);
        let d = ExponentData::parse("0,0", "1/4,1/2").unwrap();
        for l in 1..6 {
            assert!(coefficient_recurrence_residual::<f64>(&d, SeriesSide::Zero, l) <= 1e-10);
            assert!(coefficient_recurrence_residual::<f64>(&d, SeriesSide::Infinity, l) <= 1e-10);
        }
    }

    #[test]
    fn operator_residual_small_on_circle() {
        for (a, bb) in [("0,0", "1/4,1/2"), ("0,1/3,2/3", "1/4,1/2,3/4"), ("1/5", "1/2")] {
            let d = ExponentData::parse(a, bb).unwrap();
            for side in [SeriesSide::Zero, SeriesSide::Infinity] {
                let rho = if side == SeriesSide::Zero { 0.5 } else { 2.0 };
                let basis = build_basis::<f64>(&d, side, 10);
                for s in &basis {
                    for k in 0..8 {
                        let p = CoverPoint::polar(rho, 2.0 * PI * k as f64 / 8.0 - 0.4);
                        let r = operator_residual(&d, s, &p, 80);
                        assert!(r <= 1e-9, "{a}|{bb} {side:?} r={r}");
                    }
                }
            }
        }
    }

    #[test]
    fn independence() {
        let d = ExponentData::parse("0,1/2", "1/4,3/4").unwrap();
        let basis = build_basis::<f64>(&d, SeriesSide::Zero, 10);
        let w = wronskian(&basis, &CoverPoint::polar(0.5, 0.0)).unwrap();
        assert!(w.condition() < 1e10);
    }

    #[test]
    fn outside_region_is_rejected() {
        let d = ExponentData::parse("0", "1/2").unwrap();
        let b = build_basis::<f64>(&d, SeriesSide::Zero, 5);
        assert!(matches!(eval_series(&b[0], &CoverPoint::polar(1.5, 0.0)), Err(Error::OutsideConvergence(_))));
    }
}
