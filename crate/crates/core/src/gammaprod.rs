//! Reciprocal gamma function, the balanced gamma product
//! `G(s) = 1 / (prod Gamma(s - alpha_i + 1) prod Gamma(-s + beta_i + 1))`,
//! its Taylor jets in the shift parameter, and growth estimates.
//!
//! Everything is computed from one primitive: the jet of `ln(1/Gamma)` at a
//! point, carried as `e^k exp(L(e))` so that zeros of `1/Gamma` at the
//! non-positive integers are represented exactly instead of through `ln 0`.

use num_complex::Complex;
use num_traits::{One, Zero};
use serde_json::json;

use crate::exponents::ExponentData;
use crate::jet::Taylor;
use crate::report::{json_f64, CheckResult, VerificationReport};
use crate::scalar::{ComplexExt, Real};

/// `B_{2k} / (2k (2k-1))` for `k = 1..=24`.
const STIRLING_COEFFS: [(i128, i128); 24] = [
    (1, 12),
    (-1, 360),
    (1, 1260),
    (-1, 1680),
    (1, 1188),
    (-691, 360360),
    (1, 156),
    (-3617, 122400),
    (43867, 244188),
    (-174611, 125400),
    (77683, 5796),
    (-236364091, 1506960),
    (657931, 300),
    (-3392780147, 93960),
    (1723168255201, 2492028),
    (-7709321041217, 505920),
    (151628697551, 396),
    (-26315271553053477373, 2418179400),
    (154210205991661, 444),
    (-261082718496449122051, 21106800),
    (1520097643918070802691, 3109932),
    (-2530297234481911294093, 118680),
    (25932657025822267968607, 25380),
    (-5609403368997817686249127547, 104700960),
];

/// Normalized derivatives `c_r = (d / (2 pi i dt))^r F(t)` at `t0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet<T: Real> {
    pub t0: T,
    pub coefficients: Vec<Complex<T>>,
}

impl<T: Real> Jet<T> {
    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }
}

/// `e^zero_order * exp(log(e))`.
#[derive(Clone, Debug)]
pub struct LogJet<T: Real> {
    pub zero_order: usize,
    pub log: Taylor<T>,
}

impl<T: Real> LogJet<T> {
    pub fn one(order: usize) -> Self {
        LogJet { zero_order: 0, log: Taylor::zero(order) }
    }

    pub fn mul_assign(&mut self, other: &LogJet<T>) {
        self.zero_order += other.zero_order;
        self.log = &self.log + &other.log;
    }

    pub fn to_taylor(&self) -> Taylor<T> {
        let order = self.log.order();
        if self.zero_order > order {
            return Taylor::zero(order);
        }
        self.log.exp().shift_up(self.zero_order)
    }

    pub fn value(&self) -> Complex<T> {
        if self.zero_order > 0 {
            Complex::zero()
        } else {
            self.log.value().exp()
        }
    }
}

// Stirling series for ln Gamma at w0 + slope * e; needs Re w0 large.
fn stirling_jet<T: Real>(w0: Complex<T>, slope: Complex<T>, order: usize) -> Taylor<T> {
    let w = Taylor::linear(w0, slope, order);
    let ln_w = Taylor::ln_linear(w0, slope, order);
    let half = Complex::real(T::lit(0.5));
    let mut main = &(&w.clone().add_const(-half) * &ln_w) - &w;
    main = main.add_const(Complex::real(T::lit(0.5) * (T::TAU()).ln()));

    let inv = Taylor::recip_linear(w0, slope, order);
    let inv2 = &inv * &inv;
    let terms = T::STIRLING_TERMS.min(STIRLING_COEFFS.len());
    let coeff = |k: usize| {
        let (p, q) = STIRLING_COEFFS[k];
        Complex::real(T::ratio(p, q))
    };
    let mut acc = Taylor::constant(coeff(terms - 1), order);
    for k in (0..terms - 1).rev() {
        acc = (&inv2 * &acc).add_const(coeff(k));
    }
    &main + &(&inv * &acc)
}

/// Jet of `ln Gamma(w0 + slope e)` for `Re w0 >= 1/2`.
fn ln_gamma_jet<T: Real>(w0: Complex<T>, slope: Complex<T>, order: usize) -> Taylor<T> {
    let target = T::lit(T::STIRLING_SHIFT);
    let shift = if w0.re < target { (target - w0.re).ceil().to_usize_lossy() } else { 0 };
    let mut acc = stirling_jet(w0 + T::from_usize_lossy(shift), slope, order);
    for k in 0..shift {
        acc = &acc - &Taylor::ln_linear(w0 + T::from_usize_lossy(k), slope, order);
    }
    acc
}

trait ToUsize {
    fn to_usize_lossy(self) -> usize;
}

impl<T: Real> ToUsize for T {
    fn to_usize_lossy(self) -> usize {
        self.to_usize().unwrap_or(0)
    }
}

/// `Some(K)` when `w` equals `-K` for an integer `K >= 0` up to rounding.
fn nonpositive_integer<T: Real>(w: Complex<T>) -> Option<i64> {
    let tol = T::epsilon() * T::lit(8.0) * (T::one() + w.norm());
    if w.re > T::lit(0.5) || w.im.abs() > tol {
        return None;
    }
    let k = w.re.round();
    ((w.re - k).abs() <= tol).then(|| -k.to_i64().unwrap_or(0))
}

/// Jet of `1/Gamma(w0 + slope e)` with `slope = +-1`, in log form.
pub fn recip_gamma_logjet<T: Real>(w0: Complex<T>, slope: T, order: usize) -> LogJet<T> {
    let sl = Complex::real(slope);
    if w0.re >= T::lit(0.5) {
        return LogJet { zero_order: 0, log: -&ln_gamma_jet(w0, sl, order) };
    }
    // 1/Gamma(w) = sin(pi w) Gamma(1 - w) / pi
    let reflected = ln_gamma_jet(Complex::<T>::one() - w0, -sl, order);
    let pi = T::PI();
    if let Some(k) = nonpositive_integer(w0) {
        // sin(pi(-K + s e)) = (-1)^K s pi e sinc(pi e)
        let sign = if k % 2 == 0 { slope } else { -slope };
        let sign_log = if sign > T::zero() { Complex::zero() } else { Complex::new(T::zero(), pi) };
        let sinc = Taylor::sinc_linear(Complex::real(pi), order).ln();
        let log = (&sinc + &reflected).add_const(sign_log);
        return LogJet { zero_order: 1, log };
    }
    let sin = Taylor::sin_linear(w0 * pi, sl * pi, order).ln();
    let log = (&sin + &reflected).add_const(-Complex::real(pi.ln()));
    LogJet { zero_order: 0, log }
}

/// `1/Gamma(s)`, entire.
pub fn reciprocal_gamma<T: Real>(s: Complex<T>) -> Complex<T> {
    recip_gamma_logjet(s, T::one(), 0).value()
}

/// `ln |1/Gamma(s)|`, `-inf` at the poles of Gamma.
pub fn log_abs_reciprocal_gamma<T: Real>(s: Complex<T>) -> T {
    let j = recip_gamma_logjet(s, T::one(), 0);
    if j.zero_order > 0 {
        T::neg_infinity()
    } else {
        j.log.value().re
    }
}

/// Log-jet of `G(l + t0 + e)` for the exponent tuples in working precision.
///
/// The argument of each gamma factor is formed as `(t0 - alpha_i) + (l + 1)`
/// so that integer coincidences survive rounding.
pub fn balanced_gamma_logjet<T: Real>(alpha: &[T], beta: &[T], t0: Complex<T>, l: i64, order: usize) -> LogJet<T> {
    let mut acc = LogJet::one(order);
    let lp = T::from_i64_lossy(l + 1);
    let lm = T::from_i64_lossy(1 - l);
    for &a in alpha {
        let w0 = (t0 - a) + lp;
        acc.mul_assign(&recip_gamma_logjet(w0, T::one(), order));
    }
    for &b in beta {
        let w0 = (-t0 + b) + lm;
        acc.mul_assign(&recip_gamma_logjet(w0, -T::one(), order));
    }
    acc
}

/// Taylor coefficients (not normalized) of `G(l + t)` at `t = t0`.
pub fn balanced_gamma_taylor<T: Real>(alpha: &[T], beta: &[T], t0: T, l: i64, order: usize) -> Taylor<T> {
    balanced_gamma_logjet(alpha, beta, Complex::real(t0), l, order).to_taylor()
}

/// The balanced gamma product at a complex point.
pub fn balanced_gamma<T: Real>(data: &ExponentData, s: Complex<T>) -> Complex<T> {
    let a = data.alpha_real::<T>();
    let b = data.beta_real::<T>();
    balanced_gamma_logjet(&a, &b, s, 0, 0).value()
}

/// Normalized jet of `G(l + t)` at `t = t0`.
pub fn balanced_gamma_jet<T: Real>(data: &ExponentData, t0: T, order: usize, l: i64) -> Jet<T> {
    let a = data.alpha_real::<T>();
    let b = data.beta_real::<T>();
    let taylor = balanced_gamma_taylor(&a, &b, t0, l, order);
    Jet { t0, coefficients: taylor.normalized_derivatives() }
}

/// Relative defect of `G(s) prod(s - alpha_i) = G(s-1) prod(-(s-1) + beta_i)`.
pub fn gamma_identity_residual<T: Real>(data: &ExponentData, s: Complex<T>) -> T {
    let one = Complex::<T>::one();
    let lhs = data.alpha_real::<T>().iter().fold(balanced_gamma(data, s), |acc, &a| acc * (s - a));
    let sm1 = s - one;
    let rhs = data.beta_real::<T>().iter().fold(balanced_gamma(data, sm1), |acc, &b| acc * (-sm1 + b));
    let den = lhs.norm() + rhs.norm() + T::min_positive_value();
    (lhs - rhs).norm() / den
}

/// `ln` of `|1/Gamma(s)| / ((1+|s|)^{1/2 - Re s} e^{arg(s) Im s + Re s})`.
pub fn stirling_log_ratio<T: Real>(s: Complex<T>) -> T {
    let lg = log_abs_reciprocal_gamma(s);
    let half = T::lit(0.5);
    lg - (half - s.re) * (T::one() + s.norm()).ln() - s.arg() * s.im - s.re
}

/// Maximum of the growth ratio over a grid; passes iff it stays `<= c`.
///
/// Points on the closed negative real axis are skipped since `arg` is
/// ambiguous there.
pub fn stirling_bound_check<T: Real>(grid: &[Complex<T>], c: f64) -> VerificationReport {
    let mut max = f64::NEG_INFINITY;
    let mut argmax = [f64::NAN; 2];
    let mut skipped = 0usize;
    let mut finite = true;
    for &s in grid {
        if s.im == T::zero() && s.re <= T::zero() {
            skipped += 1;
            continue;
        }
        let lr = stirling_log_ratio(s).to_f64_lossy();
        if lr.is_nan() || lr == f64::INFINITY {
            finite = false;
        }
        if lr > max {
            max = lr;
            argmax = s.to_pair();
        }
    }
    let ratio = max.exp();
    let pass = finite && ratio.is_finite() && ratio <= c;
    VerificationReport::single(
        "stirling",
        CheckResult::new(
            pass,
            ratio,
            json!({
                "max_ratio": json_f64(ratio),
                "argmax": argmax,
                "C": c,
                "points": grid.len(),
                "skipped_negative_axis": skipped,
            }),
        ),
    )
}

/// Growth of `ln|G(iy)|` along the imaginary axis.
///
/// Reports the maximum of `(ln|G(iy)| - pi n |y|) / ln(1+|y|)` over
/// `1 <= |y| <= y_max` and the maximal centered-difference slope of
/// `ln|G(iy)|` in `|y|` over `10 <= |y| <= y_max`; passes iff that slope
/// stays below `pi n + slope_tol`.
pub fn paley_wiener_growth<T: Real>(data: &ExponentData, y_max: f64, slope_tol: f64) -> VerificationReport {
    let n = data.n() as f64;
    let a = data.alpha_real::<T>();
    let b = data.beta_real::<T>();
    let log_g = |y: f64| {
        let j = balanced_gamma_logjet(&a, &b, Complex::new(T::zero(), T::lit(y)), 0, 0);
        j.log.value().re.to_f64_lossy()
    };
    let pi = std::f64::consts::PI;
    let mut excess = f64::NEG_INFINITY;
    let mut slope = f64::NEG_INFINITY;
    let steps = (y_max * 4.0).ceil() as usize;
    for k in 0..=steps {
        let y = y_max * k as f64 / steps as f64;
        for sgn in [1.0, -1.0] {
            let yy = sgn * y;
            if y >= 1.0 {
                let e = (log_g(yy) - pi * n * y) / (1.0 + y).ln();
                excess = excess.max(e);
            }
            if y >= 10.0 && y + 0.25 <= y_max + 1e-12 {
                let h = 0.25;
                let d = (log_g(sgn * (y + h)) - log_g(sgn * (y - h))) / (2.0 * h);
                slope = slope.max(d);
            }
        }
    }
    let bound = pi * n + slope_tol;
    VerificationReport::single(
        "paley_wiener",
        CheckResult::new(
            slope <= bound && excess.is_finite(),
            slope - pi * n,
            json!({
                "max_slope": json_f64(slope),
                "slope_bound": bound,
                "max_normalized_excess": json_f64(excess),
                "y_max": y_max,
            }),
        ),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::ExponentData;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn rel(a: Complex<f64>, b: Complex<f64>) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    #[test]
    fn reciprocal_gamma_trivial_values() {
        assert!((reciprocal_gamma(c(1.0, 0.0)) - c(1.0, 0.0)).norm() < 1e-14);
        assert_eq!(reciprocal_gamma(c(0.0, 0.0)), c(0.0, 0.0));
        assert_eq!(reciprocal_gamma(c(-1.0, 0.0)), c(0.0, 0.0));
        assert_eq!(reciprocal_gamma(c(-17.0, 0.0)), c(0.0, 0.0));
    }

    #[test]
    fn reciprocal_gamma_matches_arbitrary_precision_values() {
        // 40-digit reference values of 1/Gamma
        let table = [
            ((0.5, 0.0), (0.564_189_583_547_756_3, 0.0)),
            ((3.7, -2.2), (-0.440_893_520_667_785, 0.198_759_761_127_449_2)),
            ((-4.3, 1.1), (120.863_283_734_447_39, 118.941_911_840_169_78)),
            ((-12.5, 0.25), (-576_539_244.351_336_8, 430_437_683.261_878_1)),
            ((0.1, 25.0), (-22204388460376622.768, 162467968819060710.57)),
            ((-30.2, -7.5), (-3.160_220_760_964_719_6e39, -5.773_990_677_367_636e41)),
            ((45.0, 10.0), (1.081_169_267_282_557_5e-54, -3.811_112_709_840_148_4e-55)),
            ((-0.5, 0.0), (-0.282_094_791_773_878_14, 0.0)),
        ];
        for ((sr, si), (vr, vi)) in table {
            let got = reciprocal_gamma(c(sr, si));
            assert!(rel(got, c(vr, vi)) < 1e-13, "s=({sr},{si}) rel={}", rel(got, c(vr, vi)));
        }
    }

    #[test]
    fn recurrence_on_grid() {
        for i in -30..=30 {
            for j in -30..=30 {
                let s = c(i as f64 + 0.37, j as f64 * 0.7 + 0.11);
                if s.norm() > 30.0 {
                    continue;
                }
                let lhs = reciprocal_gamma(s + 1.0);
                let rhs = reciprocal_gamma(s) / s;
                assert!(rel(lhs, rhs) < 1e-12, "s={s}");
            }
        }
    }

    #[test]
    fn balanced_gamma_examples() {
        let d = ExponentData::parse("0", "0").unwrap_err();
        assert!(matches!(d, crate::Error::ResonantPair(0, 0)));
        // the product itself does not need irreducible data
        let d = ExponentData {
            alpha: crate::exponents::parse_list("0").unwrap(),
            beta: crate::exponents::parse_list("0").unwrap(),
        };
        assert!(rel(balanced_gamma(&d, c(0.0, 0.0)), c(1.0, 0.0)) < 5e-14);
        assert!(rel(balanced_gamma(&d, c(0.5, 0.0)), c(2.0 / PI, 0.0)) < 1e-14);

        let d = ExponentData::parse("0", "1/2").unwrap();
        // 1/(Gamma(1/2) Gamma(2)) = 1/sqrt(pi), cross-checked by reflection
        let oracle = 1.0 / (PI.sqrt() * 1.0);
        assert!(rel(balanced_gamma(&d, c(-0.5, 0.0)), c(oracle, 0.0)) < 1e-14);
    }

    #[test]
    fn balanced_gamma_is_finite_at_integer_shifts() {
        let d = ExponentData::parse("0,1/3", "1/4,1/2").unwrap();
        for k in -6..=6 {
            for base in [0.0, 1.0 / 3.0, 0.25, 0.5] {
                let v = balanced_gamma(&d, c(base + k as f64, 0.0));
                assert!(v.is_finite_c());
            }
        }
    }

    #[test]
    fn zeroth_jet_is_value() {
        let d = ExponentData::parse("0,1/3", "1/4,1/2").unwrap();
        for l in [-3, 0, 5] {
            let j = balanced_gamma_jet(&d, 0.2, 0, l);
            let v = balanced_gamma(&d, c(l as f64 + 0.2, 0.0));
            assert!(rel(j.coefficients[0], v) < 1e-14);
        }
    }

    #[test]
    fn jet_against_finite_differences() {
        let d = ExponentData::parse("0", "1/2").unwrap();
        let j = balanced_gamma_jet(&d, 0.0, 2, 0);
        assert!(rel(j.coefficients[0], c(2.0 / PI.sqrt(), 0.0)) < 1e-14);
        // central difference of G(t)/(2 pi i), step 1e-5
        let h = 1e-5;
        let g = |t: f64| balanced_gamma(&d, c(t, 0.0));
        let fd = (g(h) - g(-h)) / (2.0 * h) / c(0.0, 2.0 * PI);
        assert!((j.coefficients[1] - fd).norm() < 1e-9);
        // arbitrary-precision reference for c1, c2
        assert!((j.coefficients[1] - c(0.0, -0.110_213_629_518_465_57)).norm() < 1e-14);
        assert!((j.coefficients[2] - c(0.062_969_444_134_329_59, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn resonant_jet_has_zero_of_order_two() {
        let d = ExponentData::parse("0,0", "1/4,1/2").unwrap();
        let j = balanced_gamma_jet(&d, 0.0, 3, -1);
        assert_eq!(j.coefficients[0], c(0.0, 0.0));
        assert_eq!(j.coefficients[1], c(0.0, 0.0));
        assert!((j.coefficients[2] - c(-0.033_635_893_017_085_534, 0.0)).norm() < 1e-14);
        assert!((j.coefficients[3] - c(0.0, 0.039_027_851_931_609_917)).norm() < 1e-14);
    }

    #[test]
    fn far_jets_match_reference() {
        let d = ExponentData::parse("0,1/3", "1/4,1/2").unwrap();
        let t0 = 1.0 / 3.0;
        let j = balanced_gamma_jet(&d, t0, 3, 200);
        let want = [
            c(-3.601_558_507_043_99e-8, 0.0),
            c(0.0, 3.594_634_597_252_329e-8),
            c(-1.345_502_833_522_389_6e-7, 0.0),
            c(0.0, 3.523_980_966_537_676e-8),
        ];
        for (g, w) in j.coefficients.iter().zip(want) {
            assert!(rel(*g, w) < 1e-10, "{g} vs {w}");
        }
        let j = balanced_gamma_jet(&d, t0, 3, -7);
        assert_eq!(j.coefficients[0], c(0.0, 0.0));
        let want = [
            c(0.0, -0.000_408_050_297_625_807_7),
            c(-0.000_280_923_518_490_066_8, 0.0),
            c(0.0, -0.000_363_445_700_360_520_4),
        ];
        for (g, w) in j.coefficients[1..].iter().zip(want) {
            assert!(rel(*g, w) < 1e-10, "{g} vs {w}");
        }
    }

    #[test]
    fn functional_identity_examples() {
        let d = ExponentData::parse("0", "1/2").unwrap();
        assert!(gamma_identity_residual(&d, c(0.5, 0.0)) <= 1e-12);
        let d = ExponentData::parse("0,1/2", "1/4,3/4").unwrap();
        assert!(gamma_identity_residual(&d, c(0.3, 0.7)) <= 1e-11);
        // both sides vanish: s = -1 kills G(s) and G(s-1) through alpha = 0
        let d = ExponentData::parse("0", "1/2").unwrap();
        assert_eq!(gamma_identity_residual(&d, c(-1.0, 0.0)), 0.0);
    }

    #[test]
    fn stirling_examples() {
        let r = stirling_bound_check(&[c(1.0, 0.0)], 0.521);
        let chk = r.get("stirling").unwrap();
        assert!(chk.pass);
        assert!((chk.residual - 2f64.sqrt() / 1f64.exp()).abs() < 1e-14);
        let r = stirling_bound_check(&[c(10.0, 0.0)], 1.0);
        assert!(r.get("stirling").unwrap().residual < 1.0);
    }

    #[test]
    fn stirling_grid_is_finite() {
        let mut grid = Vec::new();
        for x in -20..=20 {
            for y in -20..=20 {
                grid.push(c(x as f64, y as f64));
            }
        }
        let r = stirling_bound_check(&grid, f64::MAX);
        let chk = r.get("stirling").unwrap();
        assert!(chk.pass && chk.residual.is_finite(), "{chk:?}");
        assert_eq!(chk.details["skipped_negative_axis"], 21);
    }

    #[test]
    fn paley_wiener_slope() {
        let d = ExponentData::parse("0,1/2", "1/4,3/4").unwrap();
        let r = paley_wiener_growth::<f64>(&d, 40.0, 0.05);
        assert!(r.all_pass(), "{r:?}");
    }

    #[test]
    fn single_precision_is_usable() {
        let v = reciprocal_gamma(Complex::new(0.5f32, 0.0));
        assert!((v.re - 0.5641896).abs() < 1e-5);
    }

    #[cfg(feature = "extended")]
    #[test]
    fn quad_precision_reciprocal_gamma() {
        use f128::f128;
        // reference was computed at the binary64 values of 3.7 and -2.2
        let s = Complex::new(f128::lit(3.7), f128::lit(-2.2));
        let v = reciprocal_gamma(s);
        let want_re = f128::ratio(-44089352066778497433, 100000000000000000000);
        let want_im = f128::ratio(19875976112744918666, 100000000000000000000);
        let err = Complex::new(v.re - want_re, v.im - want_im).norm();
        assert!(err.to_f64_lossy() < 1e-19, "err = {err}");
    }
}
