//! Tanh-sinh quadrature for integrands with algebraic endpoint behaviour,
//! and Chebyshev interpolation/differentiation on an interval.

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureParams {
    /// Target error, absolute for results of size at most one, else relative.
    pub tol: f64,
    pub min_level: usize,
    pub max_level: usize,
}

impl Default for QuadratureParams {
    fn default() -> Self {
        QuadratureParams { tol: 1e-10, min_level: 3, max_level: 9 }
    }
}

impl QuadratureParams {
    pub fn with_tol(tol: f64) -> Self {
        QuadratureParams { tol, ..Self::default() }
    }
}

/// A quadrature node with both distances to the endpoints computed
/// without cancellation.
#[derive(Clone, Copy, Debug)]
pub struct Node<T: Real> {
    pub x: T,
    /// `x - a`
    pub da: T,
    /// `b - x`
    pub db: T,
    weight: T,
    level: usize,
}

/// Nested tanh-sinh rule on `[a, b]`; refining keeps all earlier nodes.
#[derive(Clone, Debug)]
pub struct TanhSinh<T: Real> {
    pub a: T,
    pub b: T,
    pub nodes: Vec<Node<T>>,
    pub level: usize,
    min_level: usize,
    t_max: T,
}

impl<T: Real> TanhSinh<T> {
    pub fn new(a: T, b: T, min_level: usize) -> Self {
        // weights fall below the working epsilon well before these cutoffs
        let t_max = if T::epsilon() < T::lit(1e-20) { T::lit(4.6) } else { T::lit(3.7) };
        let mut rule = TanhSinh { a, b, nodes: Vec::new(), level: min_level, min_level, t_max };
        let h = rule.step(min_level);
        let jmax = (t_max / h).floor().to_i64().unwrap_or(0);
        for j in -jmax..=jmax {
            rule.push(T::from_i64_lossy(j) * h, min_level);
        }
        rule
    }

    fn step(&self, level: usize) -> T {
        T::lit(0.5).powi(level as i32)
    }

    fn push(&mut self, t: T, level: usize) {
        let half_pi = T::FRAC_PI_2();
        let u = half_pi * t.sinh();
        let len = self.b - self.a;
        let two_u = u + u;
        let da = len / (T::one() + (-two_u).exp());
        let db = len / (T::one() + two_u.exp());
        let cu = u.cosh();
        let weight = len * T::lit(0.5) * half_pi * t.cosh() / (cu * cu);
        if da > T::zero() && db > T::zero() && weight.is_finite() && weight > T::zero() {
            // pick the representation with less rounding
            let x = if da < db { self.a + da } else { self.b - db };
            self.nodes.push(Node { x, da, db, weight, level });
        }
    }

    /// Adds the next level; returns the index of the first new node.
    pub fn refine(&mut self) -> usize {
        let start = self.nodes.len();
        self.level += 1;
        let h = self.step(self.level);
        let jmax = (self.t_max / h).floor().to_i64().unwrap_or(0);
        let mut j = -jmax;
        if j % 2 == 0 {
            j += 1;
        }
        while j <= jmax {
            self.push(T::from_i64_lossy(j) * h, self.level);
            j += 2;
        }
        start
    }

    /// Estimate at `level <= self.level` from values aligned with `nodes`.
    pub fn estimate(&self, values: &[Complex<T>], level: usize) -> Complex<T> {
        let h = self.step(level);
        let mut s = Complex::zero();
        for (node, v) in self.nodes.iter().zip(values) {
            if node.level <= level {
                s = s + v * node.weight;
            }
        }
        s * h
    }

    pub fn min_level(&self) -> usize {
        self.min_level
    }
}

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct Integral<T: Real> {
    pub value: Complex<T>,
    pub error: f64,
    pub evaluations: usize,
}

fn accept(err: f64, value: f64, tol: f64) -> bool {
    err <= tol * value.max(1.0)
}

/// Adaptive tanh-sinh integral of `f(x, x - a, b - x)` over `(a, b)`.
pub fn integrate<T: Real, F>(a: T, b: T, params: &QuadratureParams, mut f: F) -> Result<Integral<T>>
where
    F: FnMut(T, T, T) -> Complex<T>,
{
    if !(b > a) {
        return Ok(Integral { value: Complex::zero(), error: 0.0, evaluations: 0 });
    }
    let mut rule = TanhSinh::new(a, b, params.min_level);
    let mut values: Vec<Complex<T>> = rule.nodes.iter().map(|n| f(n.x, n.da, n.db)).collect();
    let mut prev = rule.estimate(&values, rule.level);
    loop {
        let start = rule.refine();
        for n in &rule.nodes[start..] {
            values.push(f(n.x, n.da, n.db));
        }
        let cur = rule.estimate(&values, rule.level);
        let err = (cur - prev).norm().to_f64_lossy();
        if accept(err, cur.norm().to_f64_lossy(), params.tol) && cur.re.is_finite() && cur.im.is_finite() {
            return Ok(Integral { value: cur, error: err, evaluations: values.len() });
        }
        if rule.level >= params.max_level || !err.is_finite() {
            return Err(Error::Quadrature { estimate: err, tol: params.tol });
        }
        prev = cur;
    }
}

/// Integrates several weightings `g_i(x) f(x)` of one expensive integrand at
/// once, reusing the values of `f`.
pub fn integrate_many<T: Real, F, G>(
    a: T,
    b: T,
    params: &QuadratureParams,
    mut f: F,
    weights: &[G],
) -> Result<Vec<Integral<T>>>
where
    F: FnMut(T, T, T) -> Result<Complex<T>>,
    G: Fn(T) -> Complex<T>,
{
    let mut rule = TanhSinh::new(a, b, params.min_level);
    let mut fx = Vec::new();
    for n in &rule.nodes {
        fx.push(f(n.x, n.da, n.db)?);
    }
    let weighted = |rule: &TanhSinh<T>, fx: &[Complex<T>], g: &G| -> Vec<Complex<T>> {
        rule.nodes.iter().zip(fx).map(|(n, v)| g(n.x) * v).collect()
    };
    let mut prev: Vec<Complex<T>> =
        weights.iter().map(|g| rule.estimate(&weighted(&rule, &fx, g), rule.level)).collect();
    loop {
        let start = rule.refine();
        for i in start..rule.nodes.len() {
            let n = rule.nodes[i];
            fx.push(f(n.x, n.da, n.db)?);
        }
        let cur: Vec<Complex<T>> =
            weights.iter().map(|g| rule.estimate(&weighted(&rule, &fx, g), rule.level)).collect();
        let errs: Vec<f64> = cur.iter().zip(&prev).map(|(c, p)| (c - p).norm().to_f64_lossy()).collect();
        let ok = cur.iter().zip(&errs).all(|(c, &e)| accept(e, c.norm().to_f64_lossy(), params.tol));
        if ok {
            return Ok(cur
                .into_iter()
                .zip(errs)
                .map(|(value, error)| Integral { value, error, evaluations: fx.len() })
                .collect());
        }
        let worst = errs.iter().cloned().fold(0.0, f64::max);
        if rule.level >= params.max_level || !worst.is_finite() {
            return Err(Error::Quadrature { estimate: worst, tol: params.tol });
        }
        prev = cur;
    }
}

/// Chebyshev points of the second kind mapped to `[a, b]`, in
/// decreasing order (`x_0 = b`).
pub fn chebyshev_points<T: Real>(a: T, b: T, n: usize) -> Vec<T> {
    let mid = (a + b) * T::lit(0.5);
    let half = (b - a) * T::lit(0.5);
    (0..=n).map(|j| mid + half * (T::PI() * T::from_usize_lossy(j) / T::from_usize_lossy(n)).cos()).collect()
}

/// Applies the Chebyshev differentiation matrix on `[a, b]` to node values.
pub fn chebyshev_derivative<T: Real>(a: T, b: T, values: &[Complex<T>]) -> Vec<Complex<T>> {
    let n = values.len() - 1;
    if n == 0 {
        return vec![Complex::zero()];
    }
    let x: Vec<T> = (0..=n).map(|j| (T::PI() * T::from_usize_lossy(j) / T::from_usize_lossy(n)).cos()).collect();
    let c = |j: usize| {
        let s = if j.is_multiple_of(2) { T::one() } else { -T::one() };
        if j == 0 || j == n {
            s + s
        } else {
            s
        }
    };
    let scale = T::lit(2.0) / (b - a);
    let mut out = vec![Complex::<T>::zero(); n + 1];
    for i in 0..=n {
        let mut acc = Complex::<T>::zero();
        let mut diag = T::zero();
        for j in 0..=n {
            if i == j {
                continue;
            }
            let d = c(i) / (c(j) * (x[i] - x[j]));
            acc = acc + values[j] * d;
            // negative sum trick for the diagonal
            diag = diag - d;
        }
        out[i] = (acc + values[i] * diag) * scale;
    }
    out
}

/// Barycentric interpolation from Chebyshev nodes on `[a, b]` to `x`.
pub fn chebyshev_interpolate<T: Real>(a: T, b: T, values: &[Complex<T>], x: T) -> Complex<T> {
    let n = values.len() - 1;
    let pts = chebyshev_points(a, b, n);
    let mut num = Complex::zero();
    let mut den = T::zero();
    for (j, (&p, v)) in pts.iter().zip(values).enumerate() {
        let diff = x - p;
        if diff.is_zero() {
            return *v;
        }
        let mut w = if j % 2 == 0 { T::one() } else { -T::one() };
        if j == 0 || j == n {
            w = w * T::lit(0.5);
        }
        let q = w / diff;
        num = num + v * q;
        den = den + q;
    }
    num / den
}
