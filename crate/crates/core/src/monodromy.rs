//! Closed-form monodromy in the series bases at 0 (A) and infinity (B) and
//! in the basis of circle pieces `f_k`, with consistency checks.
//!
//! Matrices act on row vectors of solutions from the right:
//! continuing `(y_1, .., y_n)` along a loop gives `(y_1, .., y_n) M`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::circle_solutions::{f_piece, MAX_DIRECT_N};
use crate::error::{Error, Result};
use crate::exponents::{group_exponents, ExponentData, MultiplicityStructure, Side};
use crate::linalg::{poly_diff, poly_from_roots, Axis, ComplexMatrix};
use crate::local_solutions::SeriesSide;
use crate::matrices::{block_diagonal, cyclic_conjugate, vandermonde};
use crate::ode_oracle::{radial_values, OdeParams};
use crate::quadrature::QuadratureParams;
use crate::report::{CheckResult, VerificationReport};
use crate::scalar::{powi_c, unit_root, ComplexExt, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    A,
    B,
    #[serde(rename = "f")]
    F,
}

impl FromStr for Basis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Basis::A),
            "B" | "b" => Ok(Basis::B),
            "f" | "F" => Ok(Basis::F),
            _ => Err(Error::Precondition(format!("unknown basis {s:?} (expected A, B or f)"))),
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::A => "A",
            Basis::B => "B",
            Basis::F => "f",
        })
    }
}

/// Monodromy around 0, infinity and lambda in one basis.
#[derive(Clone, Debug)]
pub struct LoopMatrices<T: Real> {
    pub m0: ComplexMatrix<T>,
    pub minf: ComplexMatrix<T>,
    pub mlambda: ComplexMatrix<T>,
}

impl<T: Real> LoopMatrices<T> {
    /// `max |M_inf M_0 M_lambda - I|`.
    pub fn relation_residual(&self) -> f64 {
        let p = &(&self.minf * &self.m0) * &self.mlambda;
        p.max_diff(&ComplexMatrix::identity(p.size())).to_f64_lossy()
    }
}

#[derive(Clone, Debug)]
pub struct MonodromyResult<T: Real> {
    pub basis: Basis,
    pub l: i64,
    pub data: ExponentData,
    pub structure_a: MultiplicityStructure<T>,
    pub structure_b: MultiplicityStructure<T>,
    pub matrices: LoopMatrices<T>,
}

/// `floor(n / 2)`: the branch whose interval contains (or ends at) `phi = 0`.
pub fn default_branch(n: usize) -> i64 {
    (n / 2) as i64
}

/// The closed-form matrices; `M_lambda = (M_inf M_0)^{-1}`.
pub fn monodromy_matrices<T: Real>(data: &ExponentData, basis: Basis, l: i64) -> Result<MonodromyResult<T>> {
    let sa = group_exponents::<T>(data, Side::Alpha);
    let sb = group_exponents::<T>(data, Side::Beta);
    let va = vandermonde(&sa, l);
    let vb = vandermonde(&sb, l);
    let da = block_diagonal(&sa);
    let db_inv = block_diagonal(&sb).inverse()?;
    let (m0, minf, axis) = match basis {
        Basis::A => {
            let va_inv = va.inverse()?;
            let minf = &(&(&(&va * &vb.inverse()?) * &db_inv) * &vb) * &va_inv;
            (da.transpose(), minf.transpose(), Axis::Pairs(sa.pairs()))
        }
        Basis::B => {
            let vb_inv = vb.inverse()?;
            let m0 = &(&(&(&vb * &va.inverse()?) * &da) * &va) * &vb_inv;
            (m0.transpose(), db_inv.transpose(), Axis::Pairs(sb.pairs()))
        }
        Basis::F => {
            let m0 = &(&va.inverse()? * &da) * &va;
            let minf = &(&vb.inverse()? * &db_inv) * &vb;
            (m0.transpose(), minf.transpose(), Axis::Range(data.n()))
        }
    };
    let mlambda = (&minf * &m0).inverse()?;
    let label = |m: ComplexMatrix<T>| m.with_axes(axis.clone(), axis.clone());
    Ok(MonodromyResult {
        basis,
        l,
        data: data.clone(),
        structure_a: sa,
        structure_b: sb,
        matrices: LoopMatrices { m0: label(m0), minf: label(minf), mlambda: label(mlambda) },
    })
}

/// `prod (x - e^{2 pi i (sum beta - sum alpha)})`'s root: the special
/// eigenvalue of `M_lambda`.
pub fn special_eigenvalue<T: Real>(data: &ExponentData) -> Complex<T> {
    let s = data.beta_real::<T>().into_iter().fold(T::zero(), |a, b| a + b)
        - data.alpha_real::<T>().into_iter().fold(T::zero(), |a, b| a + b);
    unit_root(s)
}

/// `rank(M_lambda - I) = 1`, counting singular values above `1e-8 sigma_max`.
pub fn pseudoreflection_check<T: Real>(result: &MonodromyResult<T>) -> VerificationReport {
    let m = &result.matrices.mlambda;
    let shifted = m.shift(Complex::one());
    let sv = shifted.singular_values();
    let rank = shifted.numerical_rank(1e-8);
    let ratio = if sv.len() > 1 && sv[0] > T::zero() { (sv[1] / sv[0]).to_f64_lossy() } else { 0.0 };
    let det = m.det();
    let want = special_eigenvalue::<T>(&result.data);
    let det_err = (det - want).norm().to_f64_lossy();
    let mut r = VerificationReport::new();
    r.insert(
        "rank",
        CheckResult::new(
            rank == 1,
            ratio,
            json!({
                "rank": rank,
                "singular_values": sv.iter().map(|s| s.to_f64_lossy()).collect::<Vec<_>>(),
            }),
        ),
    );
    r.insert(
        "determinant",
        CheckResult::within(
            det_err,
            1e-9,
            json!({ "det": [det.re.to_f64_lossy(), det.im.to_f64_lossy()], "expected": [want.re.to_f64_lossy(), want.im.to_f64_lossy()] }),
        ),
    );
    r
}

/// `(V_A^t, V_B^t)` for branch `l`: `(S_A) = (f) V_A^t`, `(S_B) = (f) V_B^t`.
pub fn change_of_basis<T: Real>(data: &ExponentData, l: i64) -> Result<(ComplexMatrix<T>, ComplexMatrix<T>)> {
    let va = vandermonde(&group_exponents::<T>(data, Side::Alpha), l);
    let vb = vandermonde(&group_exponents::<T>(data, Side::Beta), l);
    Ok((va.transpose(), vb.transpose()))
}

fn rel_diff<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> f64 {
    (a.max_diff(b) / a.max_abs().max(T::one())).to_f64_lossy()
}

/// `M^A = (V_A^t)^{-1} M^f V_A^t` and `M^B = (V_B^t)^{-1} M^f V_B^t` for
/// all three loops.
pub fn basis_change_check<T: Real>(data: &ExponentData, l: i64, tol: f64) -> Result<VerificationReport> {
    let (vat, vbt) = change_of_basis::<T>(data, l)?;
    let f = monodromy_matrices::<T>(data, Basis::F, l)?.matrices;
    let mut r = VerificationReport::new();
    for (basis, vt) in [(Basis::A, &vat), (Basis::B, &vbt)] {
        let m = monodromy_matrices::<T>(data, basis, l)?.matrices;
        let vti = vt.inverse()?;
        let conj = |x: &ComplexMatrix<T>| &(&vti * x) * vt;
        for (name, a, b) in [("m0", &m.m0, &f.m0), ("minf", &m.minf, &f.minf), ("mlambda", &m.mlambda, &f.mlambda)] {
            r.insert(format!("{basis}.{name}"), CheckResult::within(rel_diff(a, &conj(b)), tol, json!({ "l": l })));
        }
    }
    Ok(r)
}

/// Characteristic polynomials of `M_0` and `M_inf` against
/// `prod (x - A_j)^{m_j}` and `prod (x - B_j^{-1})^{m_j}`, and one Jordan
/// block per eigenvalue of `M_0`.
pub fn eigenvalue_check<T: Real>(result: &MonodromyResult<T>, tol: f64) -> VerificationReport {
    let expand = |ms: &MultiplicityStructure<T>, invert: bool| {
        let roots: Vec<_> = ms
            .values
            .iter()
            .zip(&ms.multiplicities)
            .flat_map(|(v, &m)| std::iter::repeat_n(if invert { v.inv() } else { *v }, m))
            .collect();
        poly_from_roots(&roots)
    };
    let m = &result.matrices;
    let mut r = VerificationReport::new();
    let d0 = poly_diff(&m.m0.char_poly(), &expand(&result.structure_a, false)).to_f64_lossy();
    let dinf = poly_diff(&m.minf.char_poly(), &expand(&result.structure_b, true)).to_f64_lossy();
    r.insert("char_poly.m0", CheckResult::within(d0, tol, json!({})));
    r.insert("char_poly.minf", CheckResult::within(dinf, tol, json!({})));

    let n = m.m0.size();
    let mut ok = true;
    let mut seqs = Vec::new();
    for (v, &mult) in result.structure_a.values.iter().zip(&result.structure_a.multiplicities) {
        let seq = crate::ode_oracle::rank_sequence(&m.m0, *v, mult + 1, tol);
        let want: Vec<usize> = (1..=mult + 1).map(|p| n - p.min(mult)).collect();
        ok &= seq == want;
        seqs.push(json!({ "eigenvalue": [v.re.to_f64_lossy(), v.im.to_f64_lossy()], "ranks": seq, "expected": want }));
    }
    r.insert("jordan.m0", CheckResult::new(ok, if ok { 0.0 } else { 1.0 }, json!(seqs)));
    r
}

fn companion<T: Real>(p: &[Complex<T>]) -> ComplexMatrix<T> {
    let n = p.len() - 1;
    ComplexMatrix::from_fn(n, |i, j| {
        if j + 1 == n {
            -p[i]
        } else if i == j + 1 {
            Complex::one()
        } else {
            Complex::zero()
        }
    })
}

/// `(M_0^f)^t` is the cyclic form of `D_A`, and the pair `(M_0, M_inf^{-1})`
/// is simultaneously similar to the companion matrices of
/// `prod (x - A_j)` and `prod (x - B_j)` (compared through traces of words).
pub fn levelt_check<T: Real>(data: &ExponentData, l: i64, tol: f64) -> Result<VerificationReport> {
    let res = monodromy_matrices::<T>(data, Basis::F, l)?;
    let m = &res.matrices;
    let mut r = VerificationReport::new();
    let cyc = cyclic_conjugate(&res.structure_a, l)?;
    r.insert("cyclic_form", CheckResult::within(rel_diff(&cyc, &m.m0.transpose()), tol, json!({})));

    let ca = companion(&res.structure_a.polynomial());
    let cb = companion(&res.structure_b.polynomial());
    let a = &m.m0;
    let b = m.minf.inverse()?;
    let (ai, bi) = (a.inverse()?, b.inverse()?);
    let (cai, cbi) = (ca.inverse()?, cb.inverse()?);
    type Word<'a, T> = Vec<(&'a ComplexMatrix<T>, &'a ComplexMatrix<T>)>;
    let words: [(&str, Word<T>); 6] = [
        ("ab", vec![(a, &ca), (&b, &cb)]),
        ("aab", vec![(a, &ca), (a, &ca), (&b, &cb)]),
        ("abb", vec![(a, &ca), (&b, &cb), (&b, &cb)]),
        ("abab", vec![(a, &ca), (&b, &cb), (a, &ca), (&b, &cb)]),
        ("aB", vec![(a, &ca), (&bi, &cbi)]),
        ("Ab", vec![(&ai, &cai), (&b, &cb)]),
    ];
    let mut worst = 0f64;
    let mut traces = serde_json::Map::new();
    for (name, word) in &words {
        let n = a.size();
        let (mut x, mut y) = (ComplexMatrix::identity(n), ComplexMatrix::identity(n));
        for (p, q) in word {
            x = &x * p;
            y = &y * q;
        }
        let (tx, ty) = (x.trace(), y.trace());
        worst = worst.max(((tx - ty).norm() / (T::one() + ty.norm())).to_f64_lossy());
        traces.insert(name.to_string(), json!([tx.re.to_f64_lossy(), tx.im.to_f64_lossy()]));
    }
    r.insert("companion_pair", CheckResult::within(worst, tol, serde_json::Value::Object(traces)));
    Ok(r)
}

/// Weights of the replication identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplicationWeights {
    /// `(l - k)^r X_j^{l-k}`.
    Plain,
    /// `(2 pi i (l - k))^r X_j^{l-k}`.
    TwoPiI,
}

/// Boundary values `S_{X_j,r}(e^{2 pi i phi})` obtained by radial transport
/// (from `|z| = 0.5` for A, `|z| = 2` for B) compared with
/// `sum_k w_r(l-k) X_j^{l-k} f_k(phi - l + k)`.
///
/// For `n > 3` the pieces are recovered from the A-side values through the
/// Vandermonde system, so only the B side is an independent comparison.
#[allow(clippy::too_many_arguments)]
pub fn replication_identity_check<T: Real>(
    data: &ExponentData,
    side: SeriesSide,
    l: i64,
    phis: &[T],
    weights: ReplicationWeights,
    tol: f64,
    quad: &QuadratureParams,
    ode: &OdeParams,
) -> Result<VerificationReport> {
    let n = data.n();
    let lo = T::from_i64_lossy(l) - T::from_usize_lossy(n) * T::lit(0.5);
    if phis.iter().any(|&p| !(p > lo && p < lo + T::one())) {
        return Err(Error::Precondition(format!(
            "phi must lie in ({}, {})",
            lo.to_f64_lossy(),
            lo.to_f64_lossy() + 1.0
        )));
    }
    let ms = group_exponents::<T>(data, side.exponent_side());
    let pairs = ms.pairs();
    let weight = |j: usize, r: usize, k: usize| -> Complex<T> {
        let e = l - k as i64;
        let base = match weights {
            ReplicationWeights::Plain => Complex::real(T::from_i64_lossy(e)),
            ReplicationWeights::TwoPiI => Complex::<T>::two_pi_i() * T::from_i64_lossy(e),
        };
        let mut w = powi_c(ms.values[j - 1], e);
        for _ in 0..r {
            w = w * base;
        }
        w
    };
    let direct = n <= MAX_DIRECT_N;
    let mut worst = 0f64;
    let mut rows = Vec::new();
    for &phi in phis {
        let rho0 = match side {
            SeriesSide::Zero => T::lit(0.5),
            SeriesSide::Infinity => T::lit(2.0),
        };
        let s = radial_values(data, side, phi, rho0, T::one(), ode)?.row(0).to_vec();
        let f: Vec<Complex<T>> = if direct {
            (0..n)
                .map(|k| {
                    let x = phi - T::from_i64_lossy(l) + T::from_usize_lossy(k);
                    Ok(f_piece(data, k, &[x], quad)?.values[0])
                })
                .collect::<Result<_>>()?
        } else {
            let sa = radial_values(data, SeriesSide::Zero, phi, T::lit(0.5), T::one(), ode)?.row(0).to_vec();
            let vat = change_of_basis::<T>(data, l)?.0;
            let inv = vat.inverse()?;
            (0..n).map(|k| (0..n).fold(Complex::zero(), |acc, i| acc + sa[i] * inv[(i, k)])).collect()
        };
        for (col, &(j, r)) in pairs.iter().enumerate() {
            let want = (0..n).fold(Complex::zero(), |acc, k| acc + weight(j, r, k) * f[k]);
            let res = ((s[col] - want).norm() / s[col].norm().max(T::one())).to_f64_lossy();
            worst = worst.max(res);
            rows.push(json!({
                "phi": phi.to_f64_lossy(),
                "j": j,
                "r": r,
                "transported": [s[col].re.to_f64_lossy(), s[col].im.to_f64_lossy()],
                "replicated": [want.re.to_f64_lossy(), want.im.to_f64_lossy()],
                "residual": res,
            }));
        }
    }
    let name = match side {
        SeriesSide::Zero => "A",
        SeriesSide::Infinity => "B",
    };
    Ok(VerificationReport::single(
        name,
        CheckResult::within(
            worst,
            tol,
            json!({ "l": l, "weights": weights, "independent": direct || side == SeriesSide::Infinity, "samples": rows }),
        ),
    ))
}

/// `count` equally spaced sample points strictly inside the branch-`l` interval.
pub fn interval_samples<T: Real>(n: usize, l: i64, count: usize) -> Vec<T> {
    let lo = T::from_i64_lossy(l) - T::from_usize_lossy(n) * T::lit(0.5);
    (1..=count).map(|i| lo + T::from_usize_lossy(i) / T::from_usize_lossy(count + 1)).collect()
}
