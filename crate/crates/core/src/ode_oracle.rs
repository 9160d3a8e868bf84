//! Numerical analytic continuation of the equation along paths in
//! `C \ {0, lambda}`: an independent check on the closed-form monodromy.
//!
//! The unknown is the fundamental matrix `Y` with rows `u, Du, .., D^{n-1} u`
//! and one column per solution; loops act on columns from the right,
//! `Y_after = Y M`.

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::exponents::ExponentData;
use crate::linalg::ComplexMatrix;
use crate::local_solutions::{build_basis, expand_roots, wronskian, CoverPoint, SeriesSide, DEFAULT_TRUNCATION};
use crate::monodromy::{Basis, LoopMatrices};
use crate::report::{CheckResult, VerificationReport};
use crate::scalar::Real;

/// Closest allowed approach to 0 and lambda when evaluating the system.
pub const EVALUATION_MARGIN: f64 = 1e-8;

/// Radius of the base circle and of the seed point for the B basis.
pub const BASE_RADIUS: f64 = 0.3;
pub const OUTER_RADIUS: f64 = 3.0;
/// Radius of the small circle around lambda.
pub const LAMBDA_RADIUS: f64 = 0.4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeParams {
    pub rtol: f64,
    pub atol: f64,
    /// Largest step in the segment parameter (each segment spans `[0, 1]`).
    pub max_step: f64,
    /// Minimum distance of a path from 0 and lambda.
    pub margin: f64,
    pub max_steps: usize,
}

impl Default for OdeParams {
    fn default() -> Self {
        OdeParams { rtol: 1e-11, atol: 1e-13, max_step: 0.05, margin: 1e-3, max_steps: 200_000 }
    }
}

/// `D Y = C(z) Y` for `(lambda prod(D - alpha) - z prod(D - beta)) u = 0`.
#[derive(Clone, Debug)]
pub struct OdeSystem<T: Real> {
    pub n: usize,
    pub lambda: Complex<T>,
    // coefficients of prod(x - alpha), prod(x - beta), lowest first
    p: Vec<T>,
    q: Vec<T>,
}

pub fn companion_system<T: Real>(data: &ExponentData) -> OdeSystem<T> {
    OdeSystem {
        n: data.n(),
        lambda: data.lambda(),
        p: expand_roots(&data.alpha_real::<T>()),
        q: expand_roots(&data.beta_real::<T>()),
    }
}

impl<T: Real> OdeSystem<T> {
    /// `D^n u = sum_k c_k D^k u`; returns the `c_k`.
    fn last_row(&self, z: Complex<T>) -> Vec<Complex<T>> {
        let den = self.lambda - z;
        (0..self.n).map(|k| -(self.lambda * self.p[k] - z * self.q[k]) / den).collect()
    }

    /// The matrix `C(z)`.
    pub fn matrix(&self, z: Complex<T>) -> Result<ComplexMatrix<T>> {
        let eps = T::lit(EVALUATION_MARGIN);
        if z.norm() < eps || (z - self.lambda).norm() < eps {
            return Err(Error::NearSingularity(format!("{}", z.to_f64_lossy_c())));
        }
        let n = self.n;
        let last = self.last_row(z);
        Ok(ComplexMatrix::from_fn(n, |i, j| {
            if i + 1 == n {
                last[j]
            } else if j == i + 1 {
                Complex::one()
            } else {
                Complex::zero()
            }
        }))
    }

    /// `d/dtau` of `(Y, log det Y)` given `z` and `z'/z`.
    fn rhs(&self, z: Complex<T>, dlog: Complex<T>, y: &[Complex<T>], out: &mut [Complex<T>]) {
        let n = self.n;
        let last = self.last_row(z);
        for i in 0..n - 1 {
            for j in 0..n {
                out[i * n + j] = y[(i + 1) * n + j] * dlog;
            }
        }
        for j in 0..n {
            let mut acc = Complex::<T>::zero();
            for k in 0..n {
                acc = acc + last[k] * y[k * n + j];
            }
            out[(n - 1) * n + j] = acc * dlog;
        }
        // Abel: (log det Y)' = tr C
        out[n * n] = last[n - 1] * dlog;
    }
}

trait ToF64Pair {
    fn to_f64_lossy_c(&self) -> Complex<f64>;
}

impl<T: Real> ToF64Pair for Complex<T> {
    fn to_f64_lossy_c(&self) -> Complex<f64> {
        Complex::new(self.re.to_f64_lossy(), self.im.to_f64_lossy())
    }
}

/// One piece of a path, parametrized by `tau` in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub enum Segment<T: Real> {
    /// Straight line in `w = log z`.
    Log { from: Complex<T>, to: Complex<T> },
    /// `z = center + radius e^{i theta}`, `theta` from `theta0` to `theta1`.
    Arc { center: Complex<T>, radius: T, theta0: T, theta1: T },
    /// Straight line in `z`.
    Line { from: Complex<T>, to: Complex<T> },
}

impl<T: Real> Segment<T> {
    /// `(z, z'/z)` at `tau`.
    fn eval(&self, tau: T) -> (Complex<T>, Complex<T>) {
        match *self {
            Segment::Log { from, to } => {
                let d = to - from;
                ((from + d * tau).exp(), d)
            }
            Segment::Arc { center, radius, theta0, theta1 } => {
                let th = theta0 + (theta1 - theta0) * tau;
                let e = Complex::new(th.cos(), th.sin()) * radius;
                let z = center + e;
                (z, e * Complex::new(T::zero(), theta1 - theta0) / z)
            }
            Segment::Line { from, to } => {
                let z = from + (to - from) * tau;
                (z, (to - from) / z)
            }
        }
    }

    pub fn start(&self) -> Complex<T> {
        self.eval(T::zero()).0
    }

    pub fn end(&self) -> Complex<T> {
        self.eval(T::one()).0
    }

    pub fn reversed(&self) -> Self {
        match *self {
            Segment::Log { from, to } => Segment::Log { from: to, to: from },
            Segment::Arc { center, radius, theta0, theta1 } => {
                Segment::Arc { center, radius, theta0: theta1, theta1: theta0 }
            }
            Segment::Line { from, to } => Segment::Line { from: to, to: from },
        }
    }

    /// Change of `log z` along the segment.
    fn log_change(&self) -> Complex<T> {
        match *self {
            Segment::Log { from, to } => to - from,
            _ => {
                let pieces = 256;
                let mut acc = Complex::zero();
                let mut prev = self.start();
                for i in 1..=pieces {
                    let z = self.eval(T::from_usize_lossy(i) / T::from_usize_lossy(pieces)).0;
                    acc = acc + (z / prev).ln();
                    prev = z;
                }
                acc
            }
        }
    }

    fn min_distance(&self, p: Complex<T>) -> T {
        let samples = 2048;
        (0..=samples)
            .map(|i| (self.eval(T::from_usize_lossy(i) / T::from_usize_lossy(samples)).0 - p).norm())
            .fold(T::infinity(), T::min)
    }
}

/// A continuous piecewise path starting at a point of the universal cover.
#[derive(Clone, Debug)]
pub struct PathSpec<T: Real> {
    pub start: CoverPoint<T>,
    pub segments: Vec<Segment<T>>,
}

impl<T: Real> PathSpec<T> {
    /// Checks that consecutive segments join up.
    pub fn new(start: CoverPoint<T>, segments: Vec<Segment<T>>) -> Result<Self> {
        let mut at = start.z();
        for (i, s) in segments.iter().enumerate() {
            let gap = (s.start() - at).norm();
            if gap > T::lit(1e-9) * (T::one() + at.norm()) {
                return Err(Error::Precondition(format!(
                    "path segment {i} does not start where the previous one ends"
                )));
            }
            at = s.end();
        }
        Ok(PathSpec { start, segments })
    }

    pub fn end(&self) -> CoverPoint<T> {
        let log = self.segments.iter().fold(self.start.log, |w, s| w + s.log_change());
        CoverPoint { log }
    }

    pub fn reversed(&self) -> Self {
        PathSpec { start: self.end(), segments: self.segments.iter().rev().map(Segment::reversed).collect() }
    }

    pub fn then(&self, other: &PathSpec<T>) -> Result<Self> {
        let mut segments = self.segments.clone();
        segments.extend(other.segments.iter().cloned());
        PathSpec::new(self.start, segments)
    }

    /// Errors if the path comes closer than `margin` to 0 or `lambda`.
    pub fn validate(&self, lambda: Complex<T>, margin: f64) -> Result<()> {
        let m = T::lit(margin);
        for s in &self.segments {
            for p in [Complex::zero(), lambda] {
                let d = s.min_distance(p);
                if d < m {
                    return Err(Error::SingularityApproach {
                        point: format!("{}", p.to_f64_lossy_c()),
                        margin: d.to_f64_lossy(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Outcome of [`transport`].
#[derive(Clone, Debug)]
pub struct Transport<T: Real> {
    pub y: ComplexMatrix<T>,
    pub end: CoverPoint<T>,
    pub steps: usize,
    pub rejected: usize,
    /// `|det Y / (det Y0 exp int tr C) - 1|`.
    pub abel_drift: f64,
}

struct Dopri<T: Real> {
    // the last row is also the 5th order weight vector
    a: [[T; 6]; 6],
    e: [T; 7],
    c: [T; 7],
}

impl<T: Real> Dopri<T> {
    fn new() -> Self {
        let r = |p: i128, q: i128| T::ratio(p, q);
        let z = T::zero();
        Dopri {
            c: [z, r(1, 5), r(3, 10), r(4, 5), r(8, 9), T::one(), T::one()],
            a: [
                [r(1, 5), z, z, z, z, z],
                [r(3, 40), r(9, 40), z, z, z, z],
                [r(44, 45), r(-56, 15), r(32, 9), z, z, z],
                [r(19372, 6561), r(-25360, 2187), r(64448, 6561), r(-212, 729), z, z],
                [r(9017, 3168), r(-355, 33), r(46732, 5247), r(49, 176), r(-5103, 18656), z],
                [r(35, 384), z, r(500, 1113), r(125, 192), r(-2187, 6784), r(11, 84)],
            ],
            e: [r(71, 57600), z, r(-71, 16695), r(71, 1920), r(-17253, 339200), r(22, 525), r(-1, 40)],
        }
    }
}

fn integrate_segment<T: Real>(
    sys: &OdeSystem<T>,
    seg: &Segment<T>,
    y: &mut [Complex<T>],
    params: &OdeParams,
    tab: &Dopri<T>,
    counts: &mut (usize, usize),
) -> Result<()> {
    let dim = y.len();
    let f = |tau: T, state: &[Complex<T>], out: &mut [Complex<T>]| {
        let (z, dlog) = seg.eval(tau);
        sys.rhs(z, dlog, state, out);
    };
    let mut k: Vec<Vec<Complex<T>>> = vec![vec![Complex::zero(); dim]; 7];
    let mut tmp = vec![Complex::zero(); dim];
    let mut tau = T::zero();
    let max_step = T::lit(params.max_step);
    let mut h = T::lit(params.max_step * 0.2);
    let mut err_prev = 1e-4f64;
    f(tau, y, &mut k[0]);
    while tau < T::one() {
        if counts.0 + counts.1 > params.max_steps {
            return Err(Error::StepFailure { tau: tau.to_f64_lossy(), step: h.to_f64_lossy() });
        }
        let last = tau + h >= T::one();
        if last {
            h = T::one() - tau;
        }
        for s in 1..7 {
            for i in 0..dim {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = tab.a[s - 1][j];
                    if !a.is_zero() {
                        acc = acc + kj[i] * (a * h);
                    }
                }
                tmp[i] = acc;
            }
            let (_, tail) = k.split_at_mut(s);
            f(tau + tab.c[s] * h, &tmp, &mut tail[0]);
        }
        // tmp now holds the 5th order solution (stage 7 is evaluated there)
        let mut err = 0f64;
        for i in 0..dim {
            let mut e = Complex::zero();
            for (j, kj) in k.iter().enumerate() {
                if !tab.e[j].is_zero() {
                    e = e + kj[i] * tab.e[j];
                }
            }
            let scale = params.atol + params.rtol * y[i].norm().max(tmp[i].norm()).to_f64_lossy();
            // log det is an additive quantity; judge it on an absolute scale
            let scale = if i + 1 == dim { params.atol + params.rtol } else { scale };
            err = err.max((e * h).norm().to_f64_lossy() / scale);
        }
        if !err.is_finite() {
            return Err(Error::StepFailure { tau: tau.to_f64_lossy(), step: h.to_f64_lossy() });
        }
        if err <= 1.0 {
            counts.0 += 1;
            tau = if last { T::one() } else { tau + h };
            y.copy_from_slice(&tmp);
            let (head, tail) = k.split_at_mut(6);
            head[0].copy_from_slice(&tail[0]);
            let fac = 0.9 * err.max(1e-10).powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
            h = (h * T::lit(fac.clamp(0.2, 5.0))).min(max_step);
            err_prev = err.max(1e-4);
        } else {
            counts.1 += 1;
            h = h * T::lit((0.9 * err.powf(-0.2)).max(0.2));
        }
        if h < T::lit(1e-14) {
            return Err(Error::StepFailure { tau: tau.to_f64_lossy(), step: h.to_f64_lossy() });
        }
    }
    Ok(())
}

/// Continues the fundamental matrix `y0` (given at `path.start`) along the path.
pub fn transport<T: Real>(
    sys: &OdeSystem<T>,
    path: &PathSpec<T>,
    y0: &ComplexMatrix<T>,
    params: &OdeParams,
) -> Result<Transport<T>> {
    let n = sys.n;
    path.validate(sys.lambda, params.margin)?;
    let det0 = y0.det();
    if det0.is_zero() {
        return Err(Error::SingularMatrix(f64::INFINITY));
    }
    let mut state: Vec<Complex<T>> = y0.to_rows().into_iter().flatten().collect();
    state.push(Complex::zero());
    let tab = Dopri::new();
    let mut counts = (0, 0);
    for seg in &path.segments {
        integrate_segment(sys, seg, &mut state, params, &tab, &mut counts)?;
    }
    let log_growth = state[n * n];
    let y = ComplexMatrix::from_fn(n, |i, j| state[i * n + j]).with_axes(y0.rows.clone(), y0.cols.clone());
    let predicted = det0 * log_growth.exp();
    let abel_drift = ((y.det() - predicted) / predicted).norm().to_f64_lossy();
    Ok(Transport { y, end: path.end(), steps: counts.0, rejected: counts.1, abel_drift })
}

/// The three generating loops.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Around {
    Zero,
    Lambda,
    Infinity,
}

/// `BASE_RADIUS e^{2 pi i phi0}` with `phi0` the center of the branch-`l`
/// interval; it always lies on the ray towards `-lambda`.
pub fn base_point<T: Real>(n: usize, l: i64) -> CoverPoint<T> {
    let phi0 = T::from_i64_lossy(l) - T::from_usize_lossy(n) * T::lit(0.5) + T::lit(0.5);
    CoverPoint::polar(T::lit(BASE_RADIUS), T::TAU() * phi0)
}

/// Loop based at `base` (which must lie on the ray towards `-lambda`).
///
/// Around 0: the counterclockwise circle through `base`. Around lambda:
/// counterclockwise half circle to the ray through lambda, radially to the
/// circle of radius `LAMBDA_RADIUS` about lambda, once around it
/// counterclockwise, and back. Around infinity: radially out to
/// `OUTER_RADIUS`, once clockwise, and back. With these, "first lambda, then
/// 0, then infinity" is contractible, i.e. `M_inf M_0 M_lambda = I`.
pub fn loop_path<T: Real>(around: Around, base: CoverPoint<T>, lambda: Complex<T>) -> PathSpec<T> {
    let w0 = base.log;
    let two_pi_i = Complex::new(T::zero(), T::TAU());
    let segments = match around {
        Around::Zero => vec![Segment::Log { from: w0, to: w0 + two_pi_i }],
        Around::Infinity => {
            let w1 = Complex::new(T::lit(OUTER_RADIUS).ln(), w0.im);
            vec![
                Segment::Log { from: w0, to: w1 },
                Segment::Log { from: w1, to: w1 - two_pi_i },
                Segment::Log { from: w1 - two_pi_i, to: w0 - two_pi_i },
            ]
        }
        Around::Lambda => {
            let half = Complex::new(T::zero(), T::PI());
            let rho = base.modulus();
            let near = if rho < T::one() { T::one() - T::lit(LAMBDA_RADIUS) } else { T::one() + T::lit(LAMBDA_RADIUS) };
            let w1 = w0 + half;
            let w2 = Complex::new(near.ln(), w1.im);
            let start = lambda * near - lambda;
            let theta0 = start.im.atan2(start.re);
            let out = vec![
                Segment::Log { from: w0, to: w1 },
                Segment::Log { from: w1, to: w2 },
                Segment::Arc { center: lambda, radius: T::lit(LAMBDA_RADIUS), theta0, theta1: theta0 + T::TAU() },
            ];
            let back: Vec<_> = out[..2].iter().rev().map(Segment::reversed).collect();
            out.into_iter().chain(back).collect()
        }
    };
    PathSpec { start: base, segments }
}

/// Propagators `P` (with `Y_end = P Y_start`) of the three loops at one base point.
#[derive(Clone, Debug)]
pub struct LoopPropagators<T: Real> {
    pub base: CoverPoint<T>,
    pub zero: ComplexMatrix<T>,
    pub lambda: ComplexMatrix<T>,
    pub infinity: ComplexMatrix<T>,
    pub abel_drift: f64,
    pub steps: usize,
}

pub fn loop_propagators<T: Real>(data: &ExponentData, l: i64, params: &OdeParams) -> Result<LoopPropagators<T>> {
    let sys = companion_system::<T>(data);
    let base = base_point::<T>(data.n(), l);
    let id = ComplexMatrix::identity(sys.n);
    let mut drift = 0f64;
    let mut steps = 0;
    let mut run = |around| -> Result<ComplexMatrix<T>> {
        let t = transport(&sys, &loop_path(around, base, sys.lambda), &id, params)?;
        drift = drift.max(t.abel_drift);
        steps += t.steps;
        Ok(t.y)
    };
    let zero = run(Around::Zero)?;
    let lambda = run(Around::Lambda)?;
    let infinity = run(Around::Infinity)?;
    Ok(LoopPropagators { base, zero, lambda, infinity, abel_drift: drift, steps })
}

/// Wronskian of the A (`Zero`) or B (`Infinity`) series basis at `base`;
/// the B basis is evaluated at `OUTER_RADIUS` on the same ray and
/// transported radially inwards.
pub fn seed_wronskian<T: Real>(
    data: &ExponentData,
    side: SeriesSide,
    base: &CoverPoint<T>,
    params: &OdeParams,
) -> Result<ComplexMatrix<T>> {
    let basis = build_basis::<T>(data, side, DEFAULT_TRUNCATION);
    match side {
        SeriesSide::Zero => wronskian(&basis, base),
        SeriesSide::Infinity => {
            let seed = CoverPoint::polar(T::lit(OUTER_RADIUS), base.arg());
            let w = wronskian(&basis, &seed)?;
            let path = PathSpec::new(seed, vec![Segment::Log { from: seed.log, to: base.log }])?;
            Ok(transport(&companion_system(data), &path, &w, params)?.y)
        }
    }
}

/// Numerically continued basis at the end of a radial path from
/// `|z| = rho0` to `|z| = rho1` at angle `2 pi phi`; rows are `D^k`, columns
/// the series of `side`.
pub fn radial_values<T: Real>(
    data: &ExponentData,
    side: SeriesSide,
    phi: T,
    rho0: T,
    rho1: T,
    params: &OdeParams,
) -> Result<ComplexMatrix<T>> {
    let basis = build_basis::<T>(data, side, DEFAULT_TRUNCATION);
    let start = CoverPoint::polar(rho0, T::TAU() * phi);
    let w = wronskian(&basis, &start)?;
    let end = Complex::new(rho1.ln(), start.log.im);
    let path = PathSpec::new(start, vec![Segment::Log { from: start.log, to: end }])?;
    Ok(transport(&companion_system(data), &path, &w, params)?.y)
}

/// Loop matrices computed by numerical continuation.
#[derive(Clone, Debug)]
pub struct NumericMonodromy<T: Real> {
    pub matrices: LoopMatrices<T>,
    pub abel_drift: f64,
    /// `max |M_inf M_0 M_lambda - I|`.
    pub relation_residual: f64,
    pub steps: usize,
}

/// Loop monodromy in the A basis (`Zero`) or B basis (`Infinity`) at the
/// base point of branch `l`; `basis` `F` is not seeded numerically.
pub fn loop_monodromy<T: Real>(
    data: &ExponentData,
    basis: Basis,
    l: i64,
    params: &OdeParams,
) -> Result<NumericMonodromy<T>> {
    let side = match basis {
        Basis::A => SeriesSide::Zero,
        Basis::B => SeriesSide::Infinity,
        Basis::F => return Err(Error::Precondition("the oracle seeds only the A and B bases".into())),
    };
    let props = loop_propagators::<T>(data, l, params)?;
    let w = seed_wronskian(data, side, &props.base, params)?;
    let winv = w.inverse()?;
    let conj = |p: &ComplexMatrix<T>| &(&winv * p) * &w;
    let matrices = LoopMatrices { m0: conj(&props.zero), minf: conj(&props.infinity), mlambda: conj(&props.lambda) };
    let relation_residual = matrices.relation_residual();
    Ok(NumericMonodromy { matrices, abel_drift: props.abel_drift, relation_residual, steps: props.steps })
}

/// Sequence `rank((M - c I)^p)` for `p = 1..=p_max`.
pub fn rank_sequence<T: Real>(m: &ComplexMatrix<T>, c: Complex<T>, p_max: usize, rel_tol: f64) -> Vec<usize> {
    let shifted = m.shift(c);
    let scale = m.max_abs().max(T::one()).to_f64_lossy();
    let mut pow = ComplexMatrix::identity(m.size());
    (1..=p_max)
        .map(|p| {
            pow = &pow * &shifted;
            pow.rank_abs(rel_tol * scale.powi(p as i32))
        })
        .collect()
}

/// Conjugation-invariant comparison of two sets of loop matrices:
/// characteristic polynomials of `M_0`, `M_lambda`, `M_inf` and
/// `M_lambda M_0`, `rank(M_lambda - I)`, and Jordan rank sequences of `M_0`
/// and `M_inf` at their eigenvalues.
pub fn compare_invariants<T: Real>(
    data: &ExponentData,
    algebraic: &LoopMatrices<T>,
    numeric: &LoopMatrices<T>,
    tol: f64,
) -> VerificationReport {
    use crate::exponents::{group_exponents, Side};
    use crate::linalg::poly_diff;
    let mut r = VerificationReport::new();
    let mut cp = |name: &str, a: &ComplexMatrix<T>, b: &ComplexMatrix<T>| {
        let d = poly_diff(&a.char_poly(), &b.char_poly()).to_f64_lossy();
        r.insert(format!("char_poly.{name}"), CheckResult::within(d, tol, json!({})));
    };
    cp("m0", &algebraic.m0, &numeric.m0);
    cp("mlambda", &algebraic.mlambda, &numeric.mlambda);
    cp("minf", &algebraic.minf, &numeric.minf);
    cp("mlambda_m0", &(&algebraic.mlambda * &algebraic.m0), &(&numeric.mlambda * &numeric.m0));

    let rank_tol = 1e-8;
    let id = Complex::<T>::one();
    let ra = algebraic.mlambda.shift(id).numerical_rank(rank_tol);
    let rn = numeric.mlambda.shift(id).numerical_rank(rank_tol);
    r.insert(
        "pseudoreflection_rank",
        CheckResult::new(ra == rn, if ra == rn { 0.0 } else { 1.0 }, json!({ "algebraic": ra, "numeric": rn })),
    );

    let mut jordan = |name: &str, a: &ComplexMatrix<T>, b: &ComplexMatrix<T>, side: Side, invert: bool| {
        let ms = group_exponents::<T>(data, side);
        let mut seqs = Vec::new();
        let mut same = true;
        for (v, &m) in ms.values.iter().zip(&ms.multiplicities) {
            let c = if invert { v.inv() } else { *v };
            let sa = rank_sequence(a, c, m + 1, tol);
            let sb = rank_sequence(b, c, m + 1, tol);
            same &= sa == sb;
            seqs.push(
                json!({ "eigenvalue": [c.re.to_f64_lossy(), c.im.to_f64_lossy()], "algebraic": sa, "numeric": sb }),
            );
        }
        r.insert(format!("jordan.{name}"), CheckResult::new(same, if same { 0.0 } else { 1.0 }, json!(seqs)));
    };
    jordan("m0", &algebraic.m0, &numeric.m0, Side::Alpha, false);
    jordan("minf", &algebraic.minf, &numeric.minf, Side::Beta, true);
    r
}

/// Runs the oracle for `data` and compares against the closed-form matrices;
/// in the A and B bases the matrices are also compared entrywise.
pub fn oracle_check<T: Real>(
    data: &ExponentData,
    basis: Basis,
    l: i64,
    tol: f64,
    params: &OdeParams,
) -> Result<VerificationReport> {
    let theory = crate::monodromy::monodromy_matrices::<T>(data, basis, l)?;
    let seeded = if basis == Basis::F { Basis::A } else { basis };
    let num = loop_monodromy::<T>(data, seeded, l, params)?;
    let mut report = if basis == Basis::F {
        // compare in the f basis through the closed-form change of basis
        let vt = crate::monodromy::change_of_basis::<T>(data, l)?.0;
        let vti = vt.inverse()?;
        let to_f = |m: &ComplexMatrix<T>| &(&vt * m) * &vti;
        let in_f = LoopMatrices {
            m0: to_f(&num.matrices.m0),
            minf: to_f(&num.matrices.minf),
            mlambda: to_f(&num.matrices.mlambda),
        };
        compare_invariants(data, &theory.matrices, &in_f, tol)
    } else {
        let mut r = compare_invariants(data, &theory.matrices, &num.matrices, tol);
        for (name, a, b) in [
            ("m0", &theory.matrices.m0, &num.matrices.m0),
            ("minf", &theory.matrices.minf, &num.matrices.minf),
            ("mlambda", &theory.matrices.mlambda, &num.matrices.mlambda),
        ] {
            let d = (a.max_diff(b) / a.max_abs().max(T::one())).to_f64_lossy();
            r.insert(format!("entries.{name}"), CheckResult::within(d, tol, json!({})));
        }
        r
    };
    report.insert(
        "relation",
        CheckResult::within(num.relation_residual, tol, json!({ "order": "M_inf M_0 M_lambda = I" })),
    );
    report.insert("abel_drift", CheckResult::within(num.abel_drift, 1e-8, json!({ "steps": num.steps })));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn sqrt_data() -> ExponentData {
        ExponentData::parse("0", "1/2").unwrap()
    }

    #[test]
    fn closed_form_transport() {
        let sys = companion_system::<f64>(&sqrt_data());
        let start = CoverPoint::polar(0.3, 0.0);
        let y0 = ComplexMatrix::from_rows(vec![vec![c(1.3f64.sqrt(), 0.0)]]);
        let path = PathSpec::new(start, vec![Segment::Line { from: c(0.3, 0.0), to: c(0.5, 1.5) }]).unwrap();
        let t = transport(&sys, &path, &y0, &OdeParams::default()).unwrap();
        let want = (c(1.5, 1.5)).sqrt();
        assert!((t.y[(0, 0)] - want).norm() < 1e-10);
        assert!(t.abel_drift < 1e-10);
    }

    #[test]
    fn circle_around_lambda_flips_sign() {
        let sys = companion_system::<f64>(&sqrt_data());
        // a circle of radius 1 would pass through 0
        let start = CoverPoint::polar(0.5, std::f64::consts::PI);
        let arc = Segment::Arc { center: c(-1.0, 0.0), radius: 0.5, theta0: 0.0, theta1: std::f64::consts::TAU };
        let path = PathSpec::new(start, vec![arc]).unwrap();
        let y0 = ComplexMatrix::identity(1);
        let t = transport(&sys, &path, &y0, &OdeParams::default()).unwrap();
        assert!((t.y[(0, 0)] + c(1.0, 0.0)).norm() < 1e-8);
        assert!((t.end.log - start.log).norm() < 1e-12);
    }

    #[test]
    fn trivial_and_reversed_paths() {
        let d = ExponentData::parse("0,1/3,2/3", "1/4,1/2,3/4").unwrap();
        let sys = companion_system::<f64>(&d);
        let base = base_point::<f64>(3, 1);
        let y0 = ComplexMatrix::from_fn(3, |i, j| {
            c((i + 2 * j) as f64 * 0.3 + if i == j { 1.0 } else { 0.0 }, 0.1 * i as f64)
        });
        let empty = PathSpec::new(base, vec![]).unwrap();
        assert_eq!(transport(&sys, &empty, &y0, &OdeParams::default()).unwrap().y.max_diff(&y0), 0.0);

        let path = loop_path(Around::Lambda, base, sys.lambda);
        let fwd = transport(&sys, &path, &y0, &OdeParams::default()).unwrap();
        let back = transport(&sys, &path.reversed(), &fwd.y, &OdeParams::default()).unwrap();
        assert!(back.y.max_diff(&y0) < 1e-8);
        assert!(fwd.abel_drift < 1e-8);
    }

    #[test]
    fn concatenation_composes() {
        let d = ExponentData::parse("0,1/2", "1/4,3/4").unwrap();
        let sys = companion_system::<f64>(&d);
        let base = base_point::<f64>(2, 1);
        let id = ComplexMatrix::identity(2);
        let p = loop_path(Around::Zero, base, sys.lambda);
        let q = loop_path(Around::Lambda, base, sys.lambda);
        let params = OdeParams::default();
        let pq = transport(&sys, &p.then(&q).unwrap(), &id, &params).unwrap().y;
        let yp = transport(&sys, &p, &id, &params).unwrap().y;
        let ypq = transport(&sys, &q, &yp, &params).unwrap().y;
        assert!(pq.max_diff(&ypq) < 1e-8);
    }

    #[test]
    fn rejects_paths_through_singularities() {
        let sys = companion_system::<f64>(&sqrt_data());
        let start = CoverPoint::polar(0.5, 0.0);
        let path = PathSpec::new(start, vec![Segment::Line { from: c(0.5, 0.0), to: c(-2.0, 0.0) }]).unwrap();
        let err = transport(&sys, &path, &ComplexMatrix::identity(1), &OdeParams::default()).unwrap_err();
        assert!(matches!(err, Error::SingularityApproach { .. }));
        assert!(matches!(sys.matrix(c(-1.0, 1e-9)), Err(Error::NearSingularity(_))));
        assert!(PathSpec::new(start, vec![Segment::Line { from: c(0.4, 0.0), to: c(1.0, 0.0) }]).is_err());
    }

    #[test]
    fn n1_loop_monodromy() {
        let num = loop_monodromy::<f64>(&sqrt_data(), Basis::A, 0, &OdeParams::default()).unwrap();
        let m = &num.matrices;
        assert!((m.m0[(0, 0)] - c(1.0, 0.0)).norm() < 1e-10);
        assert!((m.mlambda[(0, 0)] + c(1.0, 0.0)).norm() < 1e-10);
        assert!((m.minf[(0, 0)] + c(1.0, 0.0)).norm() < 1e-10);
        assert!(num.relation_residual < 1e-10);
    }

    #[test]
    fn eigenvalues_around_zero() {
        let d = ExponentData::parse("0,1/2", "1/4,3/4").unwrap();
        let num = loop_monodromy::<f64>(&d, Basis::A, 1, &OdeParams::default()).unwrap();
        let cp = num.matrices.m0.char_poly();
        // (x - 1)(x + 1)
        let want = [c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        assert!(crate::linalg::poly_diff(&cp, &want) < 1e-8);
        assert_eq!(num.matrices.mlambda.shift(c(1.0, 0.0)).numerical_rank(1e-8), 1);
        assert!(num.relation_residual < 1e-8);
    }

    #[test]
    fn system_matrix_shape() {
        let d = ExponentData::parse("0,1/2", "1/4,3/4").unwrap();
        let sys = companion_system::<f64>(&d);
        let m = sys.matrix(c(0.2, 0.1)).unwrap();
        assert_eq!(m[(0, 1)], c(1.0, 0.0));
        assert_eq!(m[(0, 0)], c(0.0, 0.0));
        // near 0 the last row tends to -(coefficients of prod(x - alpha))
        let m = sys.matrix(c(1e-6, 0.0)).unwrap();
        assert!((m[(1, 1)] - c(0.5, 0.0)).norm() < 1e-5);
    }
}
