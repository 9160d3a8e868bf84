//! Generalized Vandermonde matrices `V_{A,m,l}`, the block-diagonal
//! `D_{A,m}`, and the cyclic form of `V^{-1} D V`.

use num_complex::Complex;
use num_traits::{One, Zero};
use serde_json::json;

use crate::error::Result;
use crate::exponents::MultiplicityStructure;
use crate::linalg::{poly_diff, Axis, ComplexMatrix};
use crate::report::{CheckResult, VerificationReport};
use crate::scalar::{binomial, powi_c, Real};

/// `(V)_{(j,r),k} = (l-k)^r A_j^{l-k}` with `0^0 = 1`.
pub fn vandermonde<T: Real>(ms: &MultiplicityStructure<T>, l: i64) -> ComplexMatrix<T> {
    let pairs = ms.pairs();
    let n = pairs.len();
    let mut v = ComplexMatrix::zeros(n);
    for (row, &(j, r)) in pairs.iter().enumerate() {
        let a = ms.values[j - 1];
        for k in 0..n {
            let e = l - k as i64;
            let w = T::from_i64_lossy(e).powi(r as i32);
            v[(row, k)] = powi_c(a, e) * w;
        }
    }
    v.with_axes(Axis::Pairs(pairs), Axis::Range(n))
}

/// `(D)_{(j,r),(j',r')} = binom(r, r') A_j` for `j = j'`, `r' <= r`.
pub fn block_diagonal<T: Real>(ms: &MultiplicityStructure<T>) -> ComplexMatrix<T> {
    let pairs = ms.pairs();
    let n = pairs.len();
    let mut d = ComplexMatrix::zeros(n);
    for (a, &(j, r)) in pairs.iter().enumerate() {
        for (b, &(jp, rp)) in pairs.iter().enumerate() {
            if j == jp && rp <= r {
                d[(a, b)] = ms.values[j - 1] * binomial::<T>(r, rp);
            }
        }
    }
    d.with_axes(Axis::Pairs(pairs.clone()), Axis::Pairs(pairs))
}

pub fn invert<T: Real>(m: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    m.inverse()
}

/// `V^{-1} D V`.
pub fn cyclic_conjugate<T: Real>(ms: &MultiplicityStructure<T>, l: i64) -> Result<ComplexMatrix<T>> {
    let v = vandermonde(ms, l);
    let d = block_diagonal(ms);
    Ok(&(&v.inverse()? * &d) * &v)
}

/// First column of [`cyclic_conjugate`].
pub fn companion_data<T: Real>(ms: &MultiplicityStructure<T>, l: i64) -> Result<Vec<Complex<T>>> {
    Ok(cyclic_conjugate(ms, l)?.column(0))
}

// Polynomials are coefficient vectors, lowest degree first.
fn poly_mul_x_mod<T: Real>(r: &[Complex<T>], p: &[Complex<T>]) -> Vec<Complex<T>> {
    let n = p.len() - 1;
    let mut out = vec![Complex::zero(); n];
    let top = r[n - 1];
    for k in (1..n).rev() {
        out[k] = r[k - 1];
    }
    for k in 0..n {
        out[k] = out[k] - top * p[k];
    }
    out
}

/// Coordinates of `x^{l+1}` in the basis `x^l, x^{l-1}, .., x^{l-n+1}` of
/// `C[x, 1/x] / P(x)`, by residue arithmetic.
///
/// Multiplication by `x^{n-1-l}` (invertible since `P(0) != 0`) maps the
/// basis to `x^{n-1}, .., 1` and the target to `x^n`, so the coordinates are
/// those of `x^n mod P`, read from the top degree down.
pub fn companion_by_reduction<T: Real>(ms: &MultiplicityStructure<T>) -> Result<Vec<Complex<T>>> {
    let p = ms.polynomial();
    let n = p.len() - 1;
    let mut r = vec![Complex::zero(); n];
    r[n - 1] = Complex::one();
    let xn = poly_mul_x_mod(&r, &p);
    Ok(xn.into_iter().rev().collect())
}

/// Checks the shape of `V^{-1} D V` (first column free, ones on the
/// superdiagonal, zeros elsewhere), its characteristic polynomial, and the
/// agreement of both companion-column computations.
pub fn cyclic_form_check<T: Real>(ms: &MultiplicityStructure<T>, l: i64, tol: f64) -> Result<VerificationReport> {
    let c = cyclic_conjugate(ms, l)?;
    let n = c.size();
    let scale = c.max_abs().max(T::one());
    let mut off = T::zero();
    for i in 0..n {
        for j in 1..n {
            let want = if j == i + 1 { Complex::one() } else { Complex::zero() };
            off = off.max((c[(i, j)] - want).norm());
        }
    }
    let off_rel = (off / scale).to_f64_lossy();
    let p = ms.polynomial();
    // coefficient errors relative to the size of the coefficients
    let pscale = p.iter().fold(T::one(), |m, x| m.max(x.norm()));
    let cp = (poly_diff(&c.char_poly(), &p) / pscale).to_f64_lossy();
    let lin = c.column(0);
    let red = companion_by_reduction(ms)?;
    let col = (poly_diff(&lin, &red) / pscale).to_f64_lossy();
    let pairs: Vec<[f64; 2]> = red.iter().map(|z| [z.re.to_f64_lossy(), z.im.to_f64_lossy()]).collect();

    let mut r = VerificationReport::new();
    r.insert("shape", CheckResult::within(off_rel, tol, json!({ "l": l, "n": n })));
    r.insert("char_poly", CheckResult::within(cp, tol * 10.0, json!({})));
    r.insert("companion_column", CheckResult::within(col, tol, json!({ "column": pairs })));
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ComplexMatrix;

    type M = ComplexMatrix<f64>;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn ms(values: &[f64], m: &[usize]) -> MultiplicityStructure<f64> {
        MultiplicityStructure::from_values(values.iter().map(|&x| c(x, 0.0)).collect(), m.to_vec()).unwrap()
    }

    #[test]
    fn vandermonde_examples() {
        let v = vandermonde(&ms(&[0.7], &[1]), 0);
        assert_eq!(v[(0, 0)], c(1.0, 0.0));
        let v = vandermonde(&ms(&[2.0, 3.0], &[1, 1]), 1);
        assert!(v.max_diff(&M::from_real_rows(&[&[2.0, 1.0], &[3.0, 1.0]])) < 1e-15);
        let v = vandermonde(&ms(&[1.0], &[2]), 0);
        assert!(v.max_diff(&M::from_real_rows(&[&[1.0, 1.0], &[0.0, -1.0]])) < 1e-15);
        assert_eq!(v.rows, Axis::Pairs(vec![(1, 0), (1, 1)]));
    }

    #[test]
    fn block_diagonal_examples() {
        let a = c(0.3, 0.4);
        let s = MultiplicityStructure::from_values(vec![a], vec![2]).unwrap();
        let d = block_diagonal(&s);
        assert_eq!(d.to_rows(), vec![vec![a, c(0.0, 0.0)], vec![a, a]]);
        let d = block_diagonal(&ms(&[2.0, 3.0], &[1, 1]));
        assert!(d.max_diff(&M::from_real_rows(&[&[2.0, 0.0], &[0.0, 3.0]])) == 0.0);
        let d = block_diagonal(&ms(&[1.0], &[3]));
        let want = M::from_real_rows(&[&[1.0, 0.0, 0.0], &[1.0, 1.0, 0.0], &[1.0, 2.0, 1.0]]);
        assert!(d.max_diff(&want) == 0.0);
    }

    #[test]
    fn cyclic_conjugate_anchor() {
        let s = ms(&[2.0, 3.0], &[1, 1]);
        let cc = cyclic_conjugate(&s, 1).unwrap();
        assert!(cc.max_diff(&M::from_real_rows(&[&[5.0, 1.0], &[-6.0, 0.0]])) < 1e-13);
        let col = companion_by_reduction(&s).unwrap();
        assert!((col[0] - c(5.0, 0.0)).norm() < 1e-13 && (col[1] - c(-6.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn one_by_one_conjugation() {
        let a = c(0.6, 0.8);
        let s = MultiplicityStructure::simple(vec![a]).unwrap();
        for l in -3..=3 {
            assert!((cyclic_conjugate(&s, l).unwrap()[(0, 0)] - a).norm() < 1e-14);
            assert!((companion_by_reduction(&s).unwrap()[0] - a).norm() < 1e-14);
        }
    }

    #[test]
    fn companion_of_plus_minus_one() {
        let s = ms(&[1.0, -1.0], &[1, 1]);
        let col = companion_data(&s, 0).unwrap();
        assert!((col[0]).norm() < 1e-14 && (col[1] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn resonant_char_poly() {
        let s = ms(&[1.0, -1.0], &[2, 1]);
        let cc = cyclic_conjugate(&s, 0).unwrap();
        let want = [c(1.0, 0.0), c(-1.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)];
        assert!(poly_diff(&cc.char_poly(), &want) < 1e-12);
        assert!(cyclic_form_check(&s, 0, 1e-9).unwrap().all_pass());
    }
}
