//! Solutions on the unit circle: `h = FT^{-1} G`, computed as the
//! convolution of the explicit kernels `h_{alpha,beta}`, and its pieces
//! `f_k = h|(-n/2+k, -n/2+k+1)`.
//!
//! Fourier transforms use `FT g(s) = int g(phi) e^{-2 pi i phi s} dphi`.

use std::cell::RefCell;

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponents::ExponentData;
use crate::gammaprod::{balanced_gamma, reciprocal_gamma};
use crate::quadrature::{
    chebyshev_derivative, chebyshev_interpolate, chebyshev_points, integrate, integrate_many, QuadratureParams,
};
use crate::scalar::{ComplexExt, Real};

/// Largest `n` handled by direct convolution.
pub const MAX_DIRECT_N: usize = 3;

/// Values of one piece `f_k` on a grid inside its interval.
#[derive(Clone, Debug, Serialize)]
pub struct CircleSample<T: Real> {
    pub k: usize,
    pub grid: Vec<T>,
    pub values: Vec<Complex<T>>,
}

/// `h_{alpha,beta}(phi)` given `dist = 1/2 - |phi|` (computed by the caller
/// without cancellation when `phi` is near an end point).
pub fn h_single_dist<T: Real>(alpha: T, beta: T, phi: T, dist: T) -> Complex<T> {
    if !(dist > T::zero()) {
        return Complex::zero();
    }
    let gamma = beta - alpha;
    // 1 + e^{2 pi i phi} = 2 cos(pi phi) e^{i pi phi}, cos(pi phi) = sin(pi dist)
    let modulus = (T::lit(2.0) * (T::PI() * dist).sin()).powf(gamma);
    let phase = T::PI() * phi * (alpha + beta);
    let norm = reciprocal_gamma(Complex::real(gamma + T::one())).re;
    Complex::new(phase.cos(), phase.sin()) * (modulus * norm)
}

/// `e^{2 pi i alpha phi} (1 + e^{2 pi i phi})^{beta - alpha} / Gamma(beta - alpha + 1)`
/// on `(-1/2, 1/2)`, zero elsewhere.
pub fn h_single<T: Real>(alpha: T, beta: T, phi: T) -> Complex<T> {
    h_single_dist(alpha, beta, phi, T::lit(0.5) - phi.abs())
}

fn pairs<T: Real>(data: &ExponentData) -> Vec<(T, T)> {
    data.alpha_real::<T>().into_iter().zip(data.beta_real::<T>()).collect()
}

fn check_direct(data: &ExponentData) -> Result<()> {
    if data.n() > MAX_DIRECT_N {
        return Err(Error::Precondition(format!(
            "direct convolution is limited to n <= {MAX_DIRECT_N} (got n = {})",
            data.n()
        )));
    }
    Ok(())
}

// h_{p_0} * h_{p_1} * ... at phi, supported on (-m/2, m/2).
fn convolve<T: Real>(ps: &[(T, T)], phi: T, dist: T, quad: &QuadratureParams) -> Result<Complex<T>> {
    let (a0, b0) = ps[0];
    if ps.len() == 1 {
        return Ok(h_single_dist(a0, b0, phi, dist));
    }
    let half = T::lit(0.5);
    let rest = &ps[1..];
    let r = T::from_usize_lossy(rest.len()) * half;
    let lo = (-half).max(phi - r);
    let hi = half.min(phi + r);
    if !(hi > lo) {
        return Ok(Complex::zero());
    }
    // the rest is non-smooth where phi - u = -r + k
    let mut cuts = vec![lo];
    for k in 1..rest.len() {
        let u = phi + r - T::from_usize_lossy(k);
        if u > lo && u < hi {
            cuts.push(u);
        }
    }
    cuts.push(hi);
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());

    let inner = QuadratureParams { tol: quad.tol * 0.1, ..*quad };
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let mut total = Complex::zero();
    for w in cuts.windows(2) {
        let res = integrate(w[0], w[1], quad, |u, _, _| {
            let h0 = h_single(a0, b0, u);
            if h0.is_zero() {
                return h0;
            }
            let v = phi - u;
            match convolve(rest, v, r - v.abs(), &inner) {
                Ok(g) => h0 * g,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    Complex::zero()
                }
            }
        })?;
        total = total + res.value;
    }
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(total)
}

/// `(h_{alpha_1,beta_1} * ... * h_{alpha_n,beta_n})(phi)`; needs
/// `beta_i - alpha_i > 0` for every pair and `n <= 3`.
pub fn h_convolution<T: Real>(data: &ExponentData, phi: T, quad: &QuadratureParams) -> Result<Complex<T>> {
    check_direct(data)?;
    let ps = pairs::<T>(data);
    if let Some(i) = ps.iter().position(|(a, b)| !(*b - *a > T::zero())) {
        return Err(Error::Precondition(format!("beta[{i}] - alpha[{i}] must be positive; apply shift_reduce first")));
    }
    let r = T::from_usize_lossy(ps.len()) * T::lit(0.5);
    convolve(&ps, phi, r - phi.abs(), quad)
}

/// `G_{alpha,beta}(s) = R(s) G_{alpha,beta+m}(s)`.
#[derive(Clone, Debug)]
pub struct ShiftReduction {
    pub shifted: ExponentData,
    pub m: i64,
    /// Coefficients of `R(s) = prod_i prod_{p=1..m} (-s + beta_i + p)`,
    /// lowest degree first.
    pub r_coeffs: Vec<f64>,
}

impl ShiftReduction {
    pub fn coeffs<T: Real>(&self, data: &ExponentData) -> Vec<T> {
        let mut p = vec![T::one()];
        for b in data.beta_real::<T>() {
            for k in 1..=self.m {
                let c = b + T::from_i64_lossy(k);
                let mut next = vec![T::zero(); p.len() + 1];
                for (d, &x) in p.iter().enumerate() {
                    next[d] = next[d] + x * c;
                    next[d + 1] = next[d + 1] - x;
                }
                p = next;
            }
        }
        p
    }

    pub fn eval_r<T: Real>(&self, data: &ExponentData, s: Complex<T>) -> Complex<T> {
        self.coeffs::<T>(data).iter().rev().fold(Complex::zero(), |acc, &c| acc * s + c)
    }
}

/// Smallest `m >= 0` with `beta_i + m - alpha_i > 0` for all `i`.
pub fn shift_reduce(data: &ExponentData) -> ShiftReduction {
    let m = data
        .alpha
        .iter()
        .zip(&data.beta)
        .map(|(a, b)| {
            let d = a.to_f64() - b.to_f64();
            if d < 0.0 {
                0
            } else {
                d.floor() as i64 + 1
            }
        })
        .max()
        .unwrap_or(0);
    let mut red = ShiftReduction { shifted: data.with_beta_shift(m), m, r_coeffs: Vec::new() };
    red.r_coeffs = red.coeffs::<f64>(data);
    red
}

/// End points of the interval of `f_k`.
pub fn piece_interval<T: Real>(n: usize, k: usize) -> (T, T) {
    let lo = T::from_usize_lossy(k) - T::from_usize_lossy(n) * T::lit(0.5);
    (lo, lo + T::one())
}

fn apply_r<T: Real>(coeffs: &[T], a: T, b: T, values: &[Complex<T>]) -> Vec<Complex<T>> {
    let inv = Complex::<T>::one() / Complex::<T>::two_pi_i();
    let mut out: Vec<Complex<T>> = values.iter().map(|v| v * coeffs[0]).collect();
    let mut d = values.to_vec();
    for &c in &coeffs[1..] {
        d = chebyshev_derivative(a, b, &d).into_iter().map(|x| x * inv).collect();
        for (o, x) in out.iter_mut().zip(&d) {
            *o = *o + x * c;
        }
    }
    out
}

/// Values of `f_k` on `grid`; in the non-smooth regime `f_k` is obtained as
/// `R((1/2 pi i) d/dphi) f'_k` with spectral differentiation.
pub fn f_piece<T: Real>(data: &ExponentData, k: usize, grid: &[T], quad: &QuadratureParams) -> Result<CircleSample<T>> {
    check_direct(data)?;
    let n = data.n();
    if k >= n {
        return Err(Error::Precondition(format!("piece index {k} out of range for n = {n}")));
    }
    let (lo, hi) = piece_interval::<T>(n, k);
    if grid.iter().any(|&x| !(x > lo && x < hi)) {
        return Err(Error::Precondition(format!(
            "grid must lie inside ({}, {})",
            lo.to_f64_lossy(),
            hi.to_f64_lossy()
        )));
    }
    let red = shift_reduce(data);
    if red.m == 0 || grid.is_empty() {
        let values = grid.iter().map(|&x| h_convolution(data, x, quad)).collect::<Result<_>>()?;
        return Ok(CircleSample { k, grid: grid.to_vec(), values });
    }

    let coeffs = red.coeffs::<T>(data);
    let gmin = grid.iter().cloned().fold(hi, T::min);
    let gmax = grid.iter().cloned().fold(lo, T::max);
    let margin = (gmin - lo).min(hi - gmax);
    let (a, b) = (gmin - margin * T::lit(0.5), gmax + margin * T::lit(0.5));
    let mut prev: Option<Vec<Complex<T>>> = None;
    for deg in [24usize, 36, 54, 80, 120] {
        let nodes = chebyshev_points(a, b, deg);
        let base = nodes.iter().map(|&x| h_convolution(&red.shifted, x, quad)).collect::<Result<Vec<_>>>()?;
        let derived = apply_r(&coeffs, a, b, &base);
        let values: Vec<_> = grid.iter().map(|&x| chebyshev_interpolate(a, b, &derived, x)).collect();
        if let Some(p) = &prev {
            let scale = values.iter().fold(T::one(), |m, v| m.max(v.norm()));
            let diff = values.iter().zip(p).fold(T::zero(), |m, (x, y)| m.max((x - y).norm()));
            if (diff / scale).to_f64_lossy() <= (quad.tol * 100.0).max(1e-9) {
                return Ok(CircleSample { k, grid: grid.to_vec(), values });
            }
        }
        prev = Some(values);
    }
    Err(Error::Quadrature { estimate: f64::NAN, tol: quad.tol })
}

/// Numerical `FT h` at each `s`, assembled from the pieces (of the shifted
/// problem, multiplied by `R(s)`).
pub fn fourier_transform<T: Real>(
    data: &ExponentData,
    s: &[Complex<T>],
    quad: &QuadratureParams,
) -> Result<Vec<Complex<T>>> {
    check_direct(data)?;
    let red = shift_reduce(data);
    let shifted = &red.shifted;
    let n = data.n();
    let ps = pairs::<T>(shifted);
    let r = T::from_usize_lossy(n) * T::lit(0.5);
    let weights: Vec<_> = s.iter().map(|&sv| move |x: T| (-(Complex::<T>::two_pi_i() * sv * x)).exp()).collect();
    let mut total = vec![Complex::<T>::zero(); s.len()];
    for k in 0..n {
        let (lo, hi) = piece_interval::<T>(n, k);
        let parts = integrate_many(
            lo,
            hi,
            quad,
            |x, da, db| {
                // accurate distance to the support edge for the outer pieces
                let dist = if k == 0 {
                    da
                } else if k == n - 1 {
                    db
                } else {
                    r - x.abs()
                };
                convolve(&ps, x, dist, quad)
            },
            &weights,
        )?;
        for (t, p) in total.iter_mut().zip(parts) {
            *t = *t + p.value;
        }
    }
    Ok(total.into_iter().zip(s).map(|(v, &sv)| v * red.eval_r(data, sv)).collect())
}

/// `|FT h(s) - G(s)| / (1 + |G(s)|)` for each `s`.
pub fn ft_residuals<T: Real>(data: &ExponentData, s: &[Complex<T>], quad: &QuadratureParams) -> Result<Vec<T>> {
    let ft = fourier_transform(data, s, quad)?;
    Ok(ft
        .iter()
        .zip(s)
        .map(|(v, &sv)| {
            let g = balanced_gamma(data, sv);
            (v - g).norm() / (T::one() + g.norm())
        })
        .collect())
}

pub fn ft_residual<T: Real>(data: &ExponentData, s: Complex<T>, quad: &QuadratureParams) -> Result<T> {
    Ok(ft_residuals(data, &[s], quad)?[0])
}

/// Largest jump `|h(b + d) - h(b - d)|` over the interior break points.
pub fn breakpoint_jump<T: Real>(data: &ExponentData, d: T, quad: &QuadratureParams) -> Result<T> {
    let n = data.n();
    let mut worst = T::zero();
    for k in 1..n {
        let (b, _) = piece_interval::<T>(n, k);
        let left = h_convolution(data, b - d, quad)?;
        let right = h_convolution(data, b + d, quad)?;
        worst = worst.max((left - right).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn quad() -> QuadratureParams {
        QuadratureParams::with_tol(1e-10)
    }

    #[test]
    fn h_single_examples() {
        assert!((h_single(0.0, 1.0, 0.0) - c(2.0, 0.0)).norm() < 1e-13);
        assert!(h_single(0.0, 1.0, 0.5 - 1e-12).norm() < 1e-10);
        assert!(h_single(0.0, 1.0, -0.5 + 1e-12).norm() < 1e-10);
        assert_eq!(h_single(0.0, 1.0, 0.7), c(0.0, 0.0));
        let want = 2.0 * 2f64.sqrt() / PI.sqrt();
        assert!((h_single(0.25, 0.75, 0.0) - c(want, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn h_single_matches_definition() {
        let (a, b) = (0.3, 1.1);
        for phi in [-0.4, -0.1, 0.2, 0.45] {
            let z = Complex::new(0.0, 2.0 * PI * phi).exp();
            let want = Complex::new(0.0, 2.0 * PI * a * phi).exp()
                * (c(1.0, 0.0) + z).powf(b - a)
                * reciprocal_gamma(c(b - a + 1.0, 0.0));
            assert!((h_single(a, b, phi) - want).norm() < 1e-13);
        }
    }

    #[test]
    fn one_fold_convolution_is_kernel() {
        let d = ExponentData::parse("1/3", "3/4").unwrap();
        let v = h_convolution::<f64>(&d, 0.2, &quad()).unwrap();
        assert_eq!(v, h_single(1.0 / 3.0, 0.75, 0.2));
    }

    #[test]
    fn symmetric_configuration_is_even() {
        let d = ExponentData::parse("-1/5,-1/5", "1/5,1/5").unwrap();
        for phi in [0.1, 0.37, 0.8] {
            let a = h_convolution::<f64>(&d, phi, &quad()).unwrap();
            let b = h_convolution::<f64>(&d, -phi, &quad()).unwrap();
            assert!((a - b).norm() < 1e-8);
        }
    }

    #[test]
    fn convolution_matches_independent_integral() {
        let d = ExponentData::parse("0,0", "3/4,5/4").unwrap();
        let v = h_convolution::<f64>(&d, 0.0, &quad()).unwrap();
        // midpoint rule with many points on the same integral
        let m = 200_000;
        let mut acc = c(0.0, 0.0);
        for i in 0..m {
            let u = -0.5 + (i as f64 + 0.5) / m as f64;
            acc += h_single(0.0, 0.75, u) * h_single(0.0, 1.25, -u);
        }
        acc /= m as f64;
        assert!((v - acc).norm() < 1e-6);
    }

    #[test]
    fn rejects_non_smooth_input() {
        let d = ExponentData::parse("0", "-1/2").unwrap();
        assert!(matches!(h_convolution::<f64>(&d, 0.0, &quad()), Err(Error::Precondition(_))));
    }

    #[test]
    fn shift_reduce_examples() {
        let d = ExponentData::parse("0", "1").unwrap_err();
        assert!(matches!(d, Error::ResonantPair(..)));
        let d = ExponentData::parse("0,1/3", "1/2,3/4").unwrap();
        let red = shift_reduce(&d);
        assert_eq!(red.m, 0);
        assert_eq!(red.r_coeffs, vec![1.0]);

        let d = ExponentData::parse("0", "-1/2").unwrap();
        let red = shift_reduce(&d);
        assert_eq!(red.m, 1);
        assert_eq!(red.r_coeffs, vec![0.5, -1.0]);
        for s in [c(0.3, 0.1), c(-2.0, 1.5)] {
            let lhs = balanced_gamma(&d, s);
            let rhs = red.eval_r(&d, s) * balanced_gamma(&red.shifted, s);
            assert!((lhs - rhs).norm() <= 1e-11 * lhs.norm().max(1.0));
        }

        let d = ExponentData::parse("3/2,0", "1/4,-7/3").unwrap();
        let red = shift_reduce(&d);
        assert_eq!(red.m, 3);
        assert_eq!(red.r_coeffs.len(), 7);
    }

    #[test]
    fn fourier_transform_anchor() {
        let d = ExponentData::parse("0", "1").unwrap_err();
        assert!(matches!(d, Error::ResonantPair(..)));
        // alpha = 0, beta = 1 is reducible as an equation but h is still defined
        let d = ExponentData {
            alpha: crate::exponents::parse_list("0").unwrap(),
            beta: crate::exponents::parse_list("1").unwrap(),
        };
        let r = ft_residual(&d, c(0.0, 0.0), &quad()).unwrap();
        assert!(r <= 1e-10, "{r}");
        let d = ExponentData::parse("0", "1/2").unwrap();
        let r = ft_residual(&d, c(0.5, 0.0), &quad()).unwrap();
        assert!(r <= 1e-8, "{r}");
    }

    #[test]
    fn fourier_transform_of_shifted_problem() {
        let d = ExponentData::parse("0", "-1/2").unwrap();
        let s: Vec<_> = [-2.0, 0.0, 1.0, 3.0].iter().map(|&x| c(x, 0.0)).collect();
        for r in ft_residuals(&d, &s, &quad()).unwrap() {
            assert!(r <= 1e-8, "{r}");
        }
    }

    #[test]
    fn f_piece_n1_and_shifted() {
        let d = ExponentData::parse("0", "1/2").unwrap();
        let s = f_piece(&d, 0, &[0.1, -0.3], &quad()).unwrap();
        assert_eq!(s.values[0], h_single(0.0, 0.5, 0.1));
        // shifted regime: f_0 = h_{0,-1/2} recovered from h_{0,1/2}
        let d = ExponentData::parse("0", "-1/2").unwrap();
        let grid = [-0.2, 0.0, 0.15, 0.3];
        let s = f_piece(&d, 0, &grid, &quad()).unwrap();
        for (&x, v) in grid.iter().zip(&s.values) {
            assert!((v - h_single(0.0, -0.5, x)).norm() < 1e-6, "phi={x}");
        }
        assert!(f_piece(&d, 0, &[0.6], &quad()).is_err());
    }

    #[test]
    fn continuity_at_breakpoint() {
        let d = ExponentData::parse("0,1/2", "1/4,3/4").unwrap();
        assert!(breakpoint_jump(&d, 1e-8, &quad()).unwrap() < 1e-6);
    }
}
