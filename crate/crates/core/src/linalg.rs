//! Small dense complex matrices: LU inversion, characteristic polynomials,
//! singular values and numerical rank.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{ComplexExt, Real};

/// Condition estimate above which a matrix is reported as singular.
pub const MAX_CONDITION: f64 = 1e14;

/// Row or column labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    /// `(j, r)` pairs with 1-based `j`.
    Pairs(Vec<(usize, usize)>),
    /// `k = 0..n`.
    Range(usize),
}

impl Axis {
    pub fn len(&self) -> usize {
        match self {
            Axis::Pairs(p) => p.len(),
            Axis::Range(n) => *n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix<T: Real> {
    n: usize,
    data: Vec<Complex<T>>,
    pub rows: Axis,
    pub cols: Axis,
}

impl<T: Real> fmt::Debug for ComplexMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.n, self.n)?;
        for i in 0..self.n {
            let row: Vec<String> = self.row(i).iter().map(|c| format!("{c:.6}")).collect();
            writeln!(f, "  {}", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl<T: Real> ComplexMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        ComplexMatrix { n, data: vec![Complex::zero(); n * n], rows: Axis::Range(n), cols: Axis::Range(n) }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex::one();
        }
        m
    }

    pub fn diagonal(d: &[Complex<T>]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    /// Builds from rows; panics if not square.
    pub fn from_rows(rows: Vec<Vec<Complex<T>>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        ComplexMatrix { n, data: rows.into_iter().flatten().collect(), rows: Axis::Range(n), cols: Axis::Range(n) }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| Complex::from_f64(x, 0.0)).collect()).collect())
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn with_axes(mut self, rows: Axis, cols: Axis) -> Self {
        assert_eq!(rows.len(), self.n);
        assert_eq!(cols.len(), self.n);
        self.rows = rows;
        self.cols = cols;
        self
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn column(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Complex<T>>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::from_fn(self.n, |i, j| self[(j, i)]);
        t.rows = self.cols.clone();
        t.cols = self.rows.clone();
        t
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        let mut m = self.clone();
        m.data.iter_mut().for_each(|x| *x = *x * c);
        m
    }

    /// `self - c I`.
    pub fn shift(&self, c: Complex<T>) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            m[(i, i)] = m[(i, i)] - c;
        }
        m
    }

    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(Self::identity(self.n), |acc, _| &acc * self)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.norm()))
    }

    /// `max |a_ij - b_ij|`.
    pub fn max_diff(&self, other: &Self) -> T {
        (self - other).max_abs()
    }

    fn norm1(&self) -> T {
        (0..self.n).map(|j| (0..self.n).fold(T::zero(), |s, i| s + self[(i, j)].norm())).fold(T::zero(), T::max)
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.n).fold(Complex::zero(), |s, i| s + self[(i, i)])
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(ComplexExt::is_finite_c)
    }

    /// Converts the scalar type (e.g. quad results down to `f64`).
    pub fn map_scalar<U: Real>(&self, f: impl Fn(T) -> U) -> ComplexMatrix<U> {
        ComplexMatrix {
            n: self.n,
            data: self.data.iter().map(|c| Complex::new(f(c.re), f(c.im))).collect(),
            rows: self.rows.clone(),
            cols: self.cols.clone(),
        }
    }

    pub fn to_f64(&self) -> ComplexMatrix<f64> {
        self.map_scalar(|x| x.to_f64_lossy())
    }

    /// Row-major nested `[re, im]` pairs.
    pub fn to_pairs(&self) -> Vec<Vec<[f64; 2]>> {
        (0..self.n).map(|i| self.row(i).iter().map(|c| c.to_pair()).collect()).collect()
    }

    pub fn from_pairs(rows: &[Vec<[f64; 2]>]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|p| Complex::from_f64(p[0], p[1])).collect()).collect())
    }

    /// LU factorization with partial pivoting, `P A = L U` packed in place.
    fn lu(&self) -> (Vec<Complex<T>>, Vec<usize>, bool) {
        let n = self.n;
        let mut a = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut odd = false;
        for k in 0..n {
            let p = (k..n).max_by(|&x, &y| a[x * n + k].norm().partial_cmp(&a[y * n + k].norm()).unwrap()).unwrap();
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                odd = !odd;
            }
            let piv = a[k * n + k];
            if piv.is_zero() {
                continue;
            }
            for i in k + 1..n {
                let f = a[i * n + k] / piv;
                a[i * n + k] = f;
                for j in k + 1..n {
                    a[i * n + j] = a[i * n + j] - f * a[k * n + j];
                }
            }
        }
        (a, perm, odd)
    }

    pub fn det(&self) -> Complex<T> {
        let (a, _, odd) = self.lu();
        let d = (0..self.n).fold(Complex::one(), |acc, i| acc * a[i * self.n + i]);
        if odd {
            -d
        } else {
            d
        }
    }

    /// Inverse by LU; fails when `||A||_1 ||A^-1||_1` exceeds [`MAX_CONDITION`].
    pub fn inverse(&self) -> Result<Self> {
        let n = self.n;
        let (a, perm, _) = self.lu();
        if (0..n).any(|i| a[i * n + i].is_zero()) {
            return Err(Error::SingularMatrix(f64::INFINITY));
        }
        let mut inv = Self::zeros(n);
        for col in 0..n {
            let mut x: Vec<Complex<T>> =
                (0..n).map(|i| if perm[i] == col { Complex::one() } else { Complex::zero() }).collect();
            for i in 0..n {
                for k in 0..i {
                    x[i] = x[i] - a[i * n + k] * x[k];
                }
            }
            for i in (0..n).rev() {
                for k in i + 1..n {
                    x[i] = x[i] - a[i * n + k] * x[k];
                }
                x[i] = x[i] / a[i * n + i];
            }
            for i in 0..n {
                inv[(i, col)] = x[i];
            }
        }
        let cond = (self.norm1() * inv.norm1()).to_f64_lossy();
        if !cond.is_finite() || cond > MAX_CONDITION {
            return Err(Error::SingularMatrix(cond));
        }
        inv.rows = self.cols.clone();
        inv.cols = self.rows.clone();
        Ok(inv)
    }

    /// `||A||_1 ||A^-1||_1`, infinite for singular input.
    pub fn condition(&self) -> f64 {
        match self.inverse() {
            Ok(inv) => (self.norm1() * inv.norm1()).to_f64_lossy(),
            Err(Error::SingularMatrix(c)) => c,
            Err(_) => f64::INFINITY,
        }
    }

    /// Coefficients of `det(x I - A)`, lowest degree first, monic.
    ///
    /// Reduces to Hessenberg form by stabilized elementary similarities and
    /// expands with the standard three-term style recurrence.
    pub fn char_poly(&self) -> Vec<Complex<T>> {
        let n = self.n;
        let mut h = self.clone();
        for k in 0..n.saturating_sub(2) {
            let p = (k + 1..n).max_by(|&x, &y| h[(x, k)].norm().partial_cmp(&h[(y, k)].norm()).unwrap()).unwrap();
            if p != k + 1 {
                for j in 0..n {
                    let t = h[(p, j)];
                    h[(p, j)] = h[(k + 1, j)];
                    h[(k + 1, j)] = t;
                }
                for i in 0..n {
                    let t = h[(i, p)];
                    h[(i, p)] = h[(i, k + 1)];
                    h[(i, k + 1)] = t;
                }
            }
            let piv = h[(k + 1, k)];
            if piv.is_zero() {
                continue;
            }
            for i in k + 2..n {
                let f = h[(i, k)] / piv;
                if f.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let v = h[(k + 1, j)];
                    h[(i, j)] = h[(i, j)] - f * v;
                }
                for r in 0..n {
                    let v = h[(r, i)];
                    h[(r, k + 1)] = h[(r, k + 1)] + f * v;
                }
            }
        }
        // p[k] = char poly of the leading k x k block
        let mut polys: Vec<Vec<Complex<T>>> = vec![vec![Complex::one()]];
        for k in 1..=n {
            let prev = &polys[k - 1];
            let mut pk = vec![Complex::zero(); k + 1];
            for (d, c) in prev.iter().enumerate() {
                pk[d + 1] = pk[d + 1] + c;
                pk[d] = pk[d] - h[(k - 1, k - 1)] * c;
            }
            let mut prod = Complex::one();
            for i in (1..k).rev() {
                prod = prod * h[(i, i - 1)];
                let coef = h[(i - 1, k - 1)] * prod;
                for (d, c) in polys[i - 1].iter().enumerate() {
                    pk[d] = pk[d] - coef * c;
                }
            }
            polys.push(pk);
        }
        polys.pop().unwrap()
    }

    /// Singular values in descending order (one-sided Jacobi).
    pub fn singular_values(&self) -> Vec<T> {
        let n = self.n;
        let mut cols: Vec<Vec<Complex<T>>> = (0..n).map(|j| self.column(j)).collect();
        let eps = T::epsilon();
        for _sweep in 0..60 {
            let mut rotated = false;
            for p in 0..n {
                for q in p + 1..n {
                    let alpha = cols[p].iter().fold(T::zero(), |s, x| s + x.norm_sqr());
                    let beta = cols[q].iter().fold(T::zero(), |s, x| s + x.norm_sqr());
                    let gamma = cols[p].iter().zip(&cols[q]).fold(Complex::<T>::zero(), |s, (a, b)| s + a.conj() * b);
                    let g = gamma.norm();
                    if g <= eps * (alpha * beta).sqrt() || g.is_zero() {
                        continue;
                    }
                    rotated = true;
                    let phase = gamma / g;
                    let zeta = (beta - alpha) / (g + g);
                    let sign = if zeta >= T::zero() { T::one() } else { -T::one() };
                    let t = sign / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                    let c = T::one() / (T::one() + t * t).sqrt();
                    let s = c * t;
                    #[allow(clippy::needless_range_loop)]
                    for i in 0..n {
                        let ap = cols[p][i];
                        let aq = cols[q][i] * phase.conj();
                        cols[p][i] = ap * c - aq * s;
                        cols[q][i] = (ap * s + aq * c) * phase;
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let mut sv: Vec<T> = cols.iter().map(|c| c.iter().fold(T::zero(), |s, x| s + x.norm_sqr()).sqrt()).collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
        sv
    }

    /// Number of singular values above `rel_tol * sigma_max`.
    pub fn numerical_rank(&self, rel_tol: f64) -> usize {
        let sv = self.singular_values();
        let max = sv.first().copied().unwrap_or(T::zero());
        if max.is_zero() {
            return 0;
        }
        let cut = max * T::lit(rel_tol);
        sv.iter().filter(|&&s| s > cut).count()
    }

    /// Like [`numerical_rank`](Self::numerical_rank) but with an absolute
    /// cutoff, for matrices that may legitimately vanish.
    pub fn rank_abs(&self, tol: f64) -> usize {
        let cut = T::lit(tol);
        self.singular_values().iter().filter(|&&s| s > cut).count()
    }
}

impl<T: Real> Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.n + j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for ComplexMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.n + j]
    }
}

impl<T: Real> Mul for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn mul(self, rhs: Self) -> ComplexMatrix<T> {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] = out[(i, j)] + a * rhs[(k, j)];
                }
            }
        }
        out.rows = self.rows.clone();
        out.cols = rhs.cols.clone();
        out
    }
}

impl<T: Real> Add for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn add(self, rhs: Self) -> ComplexMatrix<T> {
        let mut out = self.clone();
        out.data.iter_mut().zip(&rhs.data).for_each(|(a, b)| *a = *a + b);
        out
    }
}

impl<T: Real> Sub for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn sub(self, rhs: Self) -> ComplexMatrix<T> {
        let mut out = self.clone();
        out.data.iter_mut().zip(&rhs.data).for_each(|(a, b)| *a = *a - b);
        out
    }
}

/// Matrix-vector product.
pub fn mat_vec<T: Real>(m: &ComplexMatrix<T>, v: &[Complex<T>]) -> Vec<Complex<T>> {
    (0..m.size()).map(|i| m.row(i).iter().zip(v).fold(Complex::zero(), |s, (a, b)| s + a * b)).collect()
}

/// `max_k |p_k - q_k|` over the common length, treating missing entries as 0.
pub fn poly_diff<T: Real>(p: &[Complex<T>], q: &[Complex<T>]) -> T {
    let n = p.len().max(q.len());
    (0..n)
        .map(|k| {
            let a = p.get(k).copied().unwrap_or(Complex::zero());
            let b = q.get(k).copied().unwrap_or(Complex::zero());
            (a - b).norm()
        })
        .fold(T::zero(), T::max)
}

/// Monic polynomial with the given roots, lowest degree first.
pub fn poly_from_roots<T: Real>(roots: &[Complex<T>]) -> Vec<Complex<T>> {
    let mut p = vec![Complex::one()];
    for r in roots {
        let mut next = vec![Complex::zero(); p.len() + 1];
        for (k, c) in p.iter().enumerate() {
            next[k + 1] = next[k + 1] + c;
            next[k] = next[k] - c * r;
        }
        p = next;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = ComplexMatrix<f64>;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(M::identity(3).inverse().unwrap(), M::identity(3));
        let d = M::diagonal(&[c(2.0, 0.0), c(3.0, 0.0)]).inverse().unwrap();
        assert!((d[(0, 0)] - c(0.5, 0.0)).norm() < 1e-15);
        assert!((d[(1, 1)] - c(1.0 / 3.0, 0.0)).norm() < 1e-15);
        let a = M::from_real_rows(&[&[2.0, 1.0], &[3.0, 1.0]]);
        let want = M::from_real_rows(&[&[-1.0, 1.0], &[3.0, -2.0]]);
        assert!(a.inverse().unwrap().max_diff(&want) < 1e-14);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = M::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(matches!(a.inverse(), Err(Error::SingularMatrix(_))));
    }

    #[test]
    fn inverse_residual_on_random_matrices() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in 1..=12 {
            let a = M::from_fn(n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let inv = a.inverse().unwrap();
            assert!((&a * &inv).max_diff(&M::identity(n)) < 1e-10);
        }
    }

    #[test]
    fn char_poly_matches_roots() {
        // upper triangular plus a similarity keeps the spectrum
        let t = M::from_rows(vec![
            vec![c(1.0, 0.0), c(2.0, 1.0), c(0.5, 0.0)],
            vec![c(0.0, 0.0), c(-1.0, 0.0), c(3.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)],
        ]);
        let s = M::from_real_rows(&[&[1.0, 2.0, 0.0], &[0.0, 1.0, 3.0], &[1.0, 0.0, 1.0]]);
        let a = &(&s * &t) * &s.inverse().unwrap();
        let want = poly_from_roots(&[c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 1.0)]);
        assert!(poly_diff(&a.char_poly(), &want) < 1e-12);
    }

    #[test]
    fn singular_values_of_known_matrix() {
        let a = M::from_real_rows(&[&[3.0, 0.0], &[4.0, 5.0]]);
        let sv = a.singular_values();
        // sigma^2 are roots of x^2 - 50 x + 225
        assert!((sv[0] - 45f64.sqrt()).abs() < 1e-13);
        assert!((sv[1] - 5f64.sqrt()).abs() < 1e-13);
        let r1 = M::from_rows(vec![vec![c(1.0, 1.0), c(2.0, 0.0)], vec![c(-1.0, 1.0), c(0.0, 2.0)]]);
        assert_eq!(r1.numerical_rank(1e-8), 1);
    }
}
