//! Hypergeometric indices: parsing, the irreducibility test, and grouping
//! into distinct exponentials with multiplicities.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{unit_root, Real};

/// Absolute tolerance on fractional parts when decimals are involved.
pub const DECIMAL_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum ExponentValue {
    Exact(Rational64),
    Decimal(f64),
}

/// A single real index, remembering the text it was parsed from.
#[derive(Clone, Debug, PartialEq)]
pub struct Exponent {
    pub text: String,
    pub value: ExponentValue,
}

impl Exponent {
    pub fn exact(num: i64, den: i64) -> Self {
        let r = Rational64::new(num, den);
        Exponent { text: r.to_string(), value: ExponentValue::Exact(r) }
    }

    pub fn decimal(x: f64) -> Self {
        Exponent { text: format!("{x}"), value: ExponentValue::Decimal(x) }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.value, ExponentValue::Exact(_))
    }

    pub fn to_f64(&self) -> f64 {
        match &self.value {
            ExponentValue::Exact(r) => *r.numer() as f64 / *r.denom() as f64,
            ExponentValue::Decimal(x) => *x,
        }
    }

    /// The value in the working precision; rationals are divided in `T`.
    pub fn to_real<T: Real>(&self) -> T {
        match &self.value {
            ExponentValue::Exact(r) => T::ratio(*r.numer() as i128, *r.denom() as i128),
            ExponentValue::Decimal(x) => T::lit(*x),
        }
    }

    /// `e^{2 pi i x}`.
    pub fn exponential<T: Real>(&self) -> Complex<T> {
        match &self.value {
            ExponentValue::Exact(r) => {
                let frac = r - r.floor();
                unit_root(T::ratio(*frac.numer() as i128, *frac.denom() as i128))
            }
            ExponentValue::Decimal(x) => unit_root(T::lit(*x)),
        }
    }

    /// `Some(self - other)` when the difference is an integer (exactly for
    /// rationals, within [`DECIMAL_TOL`] otherwise).
    pub fn integer_offset(&self, other: &Exponent) -> Option<i64> {
        match (&self.value, &other.value) {
            (ExponentValue::Exact(a), ExponentValue::Exact(b)) => {
                let d = a - b;
                d.is_integer().then(|| d.to_integer())
            }
            _ => {
                let d = self.to_f64() - other.to_f64();
                let k = d.round();
                ((d - k).abs() <= DECIMAL_TOL).then_some(k as i64)
            }
        }
    }

    fn cmp_value(&self, other: &Exponent) -> Ordering {
        match (&self.value, &other.value) {
            (ExponentValue::Exact(a), ExponentValue::Exact(b)) => a.cmp(b),
            _ => self.to_f64().partial_cmp(&other.to_f64()).unwrap_or(Ordering::Equal),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.is_empty() {
            return Err(Error::Parse(s.to_string()));
        }
        if let Ok(r) = Rational64::from_str(t) {
            return Ok(Exponent { text: t.to_string(), value: ExponentValue::Exact(r) });
        }
        match t.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(Exponent { text: t.to_string(), value: ExponentValue::Decimal(x) }),
            _ => Err(Error::Parse(s.to_string())),
        }
    }
}

/// Parses a comma separated list such as `"0,1/2,0.25"`.
pub fn parse_list(s: &str) -> Result<Vec<Exponent>> {
    s.split(',').map(str::parse).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Alpha,
    Beta,
}

/// Validated data of the operator `lambda prod(D - alpha_i) - z prod(D - beta_j)`
/// with `lambda = (-1)^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentData {
    pub alpha: Vec<Exponent>,
    pub beta: Vec<Exponent>,
}

impl ExponentData {
    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    /// `(-1)^n` as a sign.
    pub fn lambda_sign(&self) -> i32 {
        if self.n().is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    pub fn lambda<T: Real>(&self) -> Complex<T> {
        Complex::new(T::lit(self.lambda_sign() as f64), T::zero())
    }

    pub fn alpha_real<T: Real>(&self) -> Vec<T> {
        self.alpha.iter().map(Exponent::to_real).collect()
    }

    pub fn beta_real<T: Real>(&self) -> Vec<T> {
        self.beta.iter().map(Exponent::to_real).collect()
    }

    pub fn side(&self, side: Side) -> &[Exponent] {
        match side {
            Side::Alpha => &self.alpha,
            Side::Beta => &self.beta,
        }
    }

    /// Parses and validates comma separated lists.
    pub fn parse(alpha: &str, beta: &str) -> Result<Self> {
        validate_irreducible(parse_list(alpha)?, parse_list(beta)?)
    }

    /// Parses and checks lengths only; for quantities (the gamma product, its
    /// Fourier transform) that make sense for reducible data too.
    pub fn parse_unchecked(alpha: &str, beta: &str) -> Result<Self> {
        let (alpha, beta) = (parse_list(alpha)?, parse_list(beta)?);
        if alpha.is_empty() || alpha.len() != beta.len() {
            return Err(Error::LengthMismatch { alpha: alpha.len(), beta: beta.len() });
        }
        Ok(ExponentData { alpha, beta })
    }

    /// Same data with every `beta_i` replaced by `beta_i + shift`.
    pub fn with_beta_shift(&self, shift: i64) -> ExponentData {
        let beta = self
            .beta
            .iter()
            .map(|b| match &b.value {
                ExponentValue::Exact(r) => {
                    let v = r + Rational64::from_integer(shift);
                    Exponent { text: v.to_string(), value: ExponentValue::Exact(v) }
                }
                ExponentValue::Decimal(x) => Exponent::decimal(x + shift as f64),
            })
            .collect();
        ExponentData { alpha: self.alpha.clone(), beta }
    }
}

/// Checks lengths and that no `alpha_i - beta_j` is an integer.
pub fn validate_irreducible(alpha: Vec<Exponent>, beta: Vec<Exponent>) -> Result<ExponentData> {
    if alpha.is_empty() || alpha.len() != beta.len() {
        return Err(Error::LengthMismatch { alpha: alpha.len(), beta: beta.len() });
    }
    for (i, a) in alpha.iter().enumerate() {
        for (j, b) in beta.iter().enumerate() {
            if a.integer_offset(b).is_some() {
                return Err(Error::ResonantPair(i, j));
            }
        }
    }
    Ok(ExponentData { alpha, beta })
}

/// Distinct exponentials `A_j` with multiplicities, in a fixed order.
///
/// Rows and columns of every pair-indexed matrix follow `pairs()`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiplicityStructure<T: Real> {
    pub values: Vec<Complex<T>>,
    pub multiplicities: Vec<usize>,
    /// `nu(A_j)` (alpha side, minimal member) or `nu'(B_j)` (beta side,
    /// maximal member); `None` for structures built from raw values.
    pub representatives: Vec<Option<Exponent>>,
    /// For each class, `(index into the side's tuple, |x_i - nu|)`.
    pub members: Vec<Vec<(usize, i64)>>,
    pub side: Option<Side>,
}

impl<T: Real> MultiplicityStructure<T> {
    /// Structure from explicit values, e.g. `A = (2, 3)`.
    pub fn from_values(values: Vec<Complex<T>>, multiplicities: Vec<usize>) -> Result<Self> {
        if values.is_empty() || values.len() != multiplicities.len() {
            return Err(Error::Precondition("values and multiplicities must be nonempty and of equal length".into()));
        }
        if multiplicities.contains(&0) {
            return Err(Error::Precondition("multiplicities must be positive".into()));
        }
        let tiny = T::epsilon() * T::lit(64.0);
        for (j, a) in values.iter().enumerate() {
            if a.norm() <= tiny {
                return Err(Error::Precondition(format!("value {j} is zero")));
            }
            for b in &values[..j] {
                if (a - b).norm() <= tiny * (T::one() + a.norm()) {
                    return Err(Error::Precondition("values must be pairwise distinct".into()));
                }
            }
        }
        let k = values.len();
        Ok(MultiplicityStructure {
            values,
            multiplicities,
            representatives: vec![None; k],
            members: vec![Vec::new(); k],
            side: None,
        })
    }

    /// All-ones multiplicities.
    pub fn simple(values: Vec<Complex<T>>) -> Result<Self> {
        let m = vec![1; values.len()];
        Self::from_values(values, m)
    }

    pub fn n(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    pub fn n_distinct(&self) -> usize {
        self.values.len()
    }

    /// Row labels `(j, r)` with 1-based `j` and `r = 0..m_j-1`.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.multiplicities.iter().enumerate().flat_map(|(j, &m)| (0..m).map(move |r| (j + 1, r))).collect()
    }

    /// Flat position of the pair `(j, r)` (1-based `j`).
    pub fn position(&self, j: usize, r: usize) -> Option<usize> {
        if j == 0 || j > self.values.len() || r >= self.multiplicities[j - 1] {
            return None;
        }
        Some(self.multiplicities[..j - 1].iter().sum::<usize>() + r)
    }

    /// Coefficients of `prod_j (x - A_j)^{m_j}`, lowest degree first, monic.
    pub fn polynomial(&self) -> Vec<Complex<T>> {
        let mut p = vec![Complex::new(T::one(), T::zero())];
        for (a, &m) in self.values.iter().zip(&self.multiplicities) {
            for _ in 0..m {
                let mut next = vec![Complex::new(T::zero(), T::zero()); p.len() + 1];
                for (k, c) in p.iter().enumerate() {
                    next[k + 1] = next[k + 1] + c;
                    next[k] = next[k] - c * a;
                }
                p = next;
            }
        }
        p
    }
}

/// Groups one side of the data into distinct exponentials.
pub fn group_exponents<T: Real>(data: &ExponentData, side: Side) -> MultiplicityStructure<T> {
    let xs = data.side(side);
    // classes of indices that agree modulo Z
    let mut classes: Vec<Vec<usize>> = Vec::new();
    'outer: for i in 0..xs.len() {
        for class in classes.iter_mut() {
            if xs[i].integer_offset(&xs[class[0]]).is_some() {
                class.push(i);
                continue 'outer;
            }
        }
        classes.push(vec![i]);
    }

    let mut groups: Vec<(Exponent, Vec<(usize, i64)>)> = classes
        .into_iter()
        .map(|class| {
            let rep_idx = *class
                .iter()
                .reduce(|a, b| {
                    let ord = xs[*b].cmp_value(&xs[*a]);
                    let better = match side {
                        Side::Alpha => ord == Ordering::Less,
                        Side::Beta => ord == Ordering::Greater,
                    };
                    if better {
                        b
                    } else {
                        a
                    }
                })
                .expect("nonempty class");
            let rep = xs[rep_idx].clone();
            let members = class
                .iter()
                .map(|&i| {
                    let off = xs[i].integer_offset(&rep).expect("same class");
                    (i, off.abs())
                })
                .collect();
            (rep, members)
        })
        .collect();
    groups.sort_by(|a, b| a.0.cmp_value(&b.0));

    MultiplicityStructure {
        values: groups.iter().map(|(rep, _)| rep.exponential()).collect(),
        multiplicities: groups.iter().map(|(_, m)| m.len()).collect(),
        representatives: groups.iter().map(|(rep, _)| Some(rep.clone())).collect(),
        members: groups.into_iter().map(|(_, m)| m).collect(),
        side: Some(side),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn list(s: &str) -> Vec<Exponent> {
        parse_list(s).unwrap()
    }

    #[test]
    fn single_pair_is_valid() {
        let d = validate_irreducible(list("0"), list("1/2")).unwrap();
        assert_eq!(d.n(), 1);
        assert_eq!(d.lambda_sign(), -1);
    }

    #[test]
    fn integer_difference_is_rejected() {
        let e = validate_irreducible(list("1/3"), list("4/3")).unwrap_err();
        assert_eq!(e, Error::ResonantPair(0, 0));
    }

    #[test]
    fn two_by_two_valid_with_positive_lambda() {
        let d = validate_irreducible(list("0,1/2"), list("1/4,3/4")).unwrap();
        assert_eq!(d.n(), 2);
        assert_eq!(d.lambda::<f64>(), Complex::new(1.0, 0.0));
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(
            validate_irreducible(list("0,1/2"), list("1/4")),
            Err(Error::LengthMismatch { alpha: 2, beta: 1 })
        ));
        assert!(validate_irreducible(vec![], vec![]).is_err());
    }

    #[test]
    fn decimals_are_compared_with_tolerance() {
        assert!(validate_irreducible(list("0.25"), list("1.25")).is_err());
        assert!(validate_irreducible(list("0.25"), list("1/4")).is_err());
        assert!(validate_irreducible(list("0.25"), list("0.2500001")).is_ok());
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(matches!(parse_list("0,x"), Err(Error::Parse(_))));
        assert!(parse_list("").is_err());
        assert!(matches!(parse_list("1/0"), Err(Error::Parse(_))));
    }

    #[test]
    fn grouping_alpha_with_integer_shift() {
        let d = validate_irreducible(list("0,1,1/2"), list("1/4,1/3,1/5")).unwrap();
        let ms = group_exponents::<f64>(&d, Side::Alpha);
        assert_eq!(ms.values, vec![Complex::new(1.0, 0.0), Complex::new(-1.0, 0.0)]);
        assert_eq!(ms.multiplicities, vec![2, 1]);
        assert_eq!(ms.representatives[0].as_ref().unwrap().text, "0");
        assert_eq!(ms.representatives[1].as_ref().unwrap().text, "1/2");
        assert_eq!(ms.members[0], vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn grouping_beta_takes_maximal_representative() {
        let d = validate_irreducible(list("0,1/2"), list("1/3,4/3")).unwrap();
        let ms = group_exponents::<f64>(&d, Side::Beta);
        assert_eq!(ms.multiplicities, vec![2]);
        assert_eq!(ms.representatives[0].as_ref().unwrap().text, "4/3");
        let expected = Complex::new(-0.5, 3f64.sqrt() / 2.0);
        assert!((ms.values[0] - expected).norm() < 1e-15);
    }

    #[test]
    fn grouping_single_quarter() {
        let d = validate_irreducible(list("1/4"), list("0")).unwrap();
        let ms = group_exponents::<f64>(&d, Side::Alpha);
        assert_eq!(ms.values, vec![Complex::new(0.0, 1.0)]);
        assert_eq!(ms.multiplicities, vec![1]);
    }

    #[test]
    fn pairs_and_positions() {
        let ms = MultiplicityStructure::<f64>::from_values(
            vec![Complex::new(1.0, 0.0), Complex::new(-1.0, 0.0)],
            vec![2, 1],
        )
        .unwrap();
        assert_eq!(ms.pairs(), vec![(1, 0), (1, 1), (2, 0)]);
        assert_eq!(ms.position(2, 0), Some(2));
        assert_eq!(ms.position(2, 1), None);
        // (x-1)^2 (x+1) = x^3 - x^2 - x + 1
        let p: Vec<f64> = ms.polynomial().iter().map(|c| c.re).collect();
        assert_eq!(p, vec![1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn raw_values_must_be_distinct_and_nonzero() {
        let one = Complex::new(1.0f64, 0.0);
        assert!(MultiplicityStructure::simple(vec![one, one]).is_err());
        assert!(MultiplicityStructure::simple(vec![Complex::new(0.0f64, 0.0)]).is_err());
        assert!(MultiplicityStructure::from_values(vec![one], vec![0]).is_err());
    }
}
