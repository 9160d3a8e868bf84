use hypermono::Complex64;
use serde_json::Value;

use crate::{Common, Failure, Precision};

fn input(msg: impl Into<String>) -> Failure {
    Failure::Input(msg.into())
}

/// The environment variable wins over the flag.
pub fn precision(common: &Common) -> Result<Precision, Failure> {
    match std::env::var("HYPERMONO_PRECISION") {
        Ok(v) => match v.trim().to_ascii_lowercase().as_str() {
            "double" => Ok(Precision::Double),
            "extended" => Ok(Precision::Extended),
            other => Err(input(format!("HYPERMONO_PRECISION must be double or extended, got {other:?}"))),
        },
        Err(_) => Ok(common.precision),
    }
}

fn list_field(v: &Value, key: &str) -> Result<Option<String>, Failure> {
    match v.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(Value::Array(items)) => items
            .iter()
            .map(|x| match x {
                Value::String(s) => Ok(s.clone()),
                Value::Number(n) => Ok(n.to_string()),
                _ => Err(input(format!("{key} entries must be strings or numbers"))),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(|xs| Some(xs.join(","))),
        Some(_) => Err(input(format!("{key} must be a string or an array"))),
    }
}

/// The exponent lists as given (flags first, then `--input`), for echoing
/// back verbatim.
pub fn exponent_strings(common: &Common) -> Result<(String, String), Failure> {
    let (mut a, mut b) = (common.alpha.clone(), common.beta.clone());
    if let Some(path) = &common.input {
        let text = std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
        let v: Value = serde_json::from_str(&text).map_err(|e| input(format!("{}: {e}", path.display())))?;
        if a.is_none() {
            a = list_field(&v, "alpha")?;
        }
        if b.is_none() {
            b = list_field(&v, "beta")?;
        }
    }
    let a = a.ok_or_else(|| input("--alpha is required"))?;
    let b = b.ok_or_else(|| input("--beta is required"))?;
    Ok((a, b))
}

fn real(s: &str) -> Result<f64, Failure> {
    let t = s.trim();
    if let Some((p, q)) = t.split_once('/') {
        let p: f64 = p.trim().parse().map_err(|_| input(format!("bad number {s:?}")))?;
        let q: f64 = q.trim().parse().map_err(|_| input(format!("bad number {s:?}")))?;
        if q == 0.0 {
            return Err(input(format!("zero denominator in {s:?}")));
        }
        return Ok(p / q);
    }
    t.parse().map_err(|_| input(format!("bad number {s:?}")))
}

/// `1.5`, `-2i`, `1+2i`, `0.5-0.25i`, `i`.
pub fn complex(s: &str) -> Result<Complex64, Failure> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(input("empty complex number"));
    }
    let Some(body) = t.strip_suffix('i') else {
        return Ok(Complex64::new(real(&t)?, 0.0));
    };
    // split at the last sign that is not an exponent sign or the leading one
    let bytes = body.as_bytes();
    let mut split = None;
    for k in (1..bytes.len()).rev() {
        if (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
            split = Some(k);
            break;
        }
    }
    let imag = |x: &str| -> Result<f64, Failure> {
        match x {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => real(x),
        }
    };
    match split {
        Some(k) => Ok(Complex64::new(real(&body[..k])?, imag(&body[k..])?)),
        None => Ok(Complex64::new(0.0, imag(body)?)),
    }
}

/// `2,3` or `1:2,-1` (value, optional multiplicity).
pub fn values(s: &str) -> Result<(Vec<Complex64>, Vec<usize>), Failure> {
    let mut vals = Vec::new();
    let mut mults = Vec::new();
    for item in s.split(',') {
        let (v, m) = match item.split_once(':') {
            Some((v, m)) => (v, m.trim().parse().map_err(|_| input(format!("bad multiplicity in {item:?}")))?),
            None => (item, 1),
        };
        vals.push(complex(v)?);
        mults.push(m);
    }
    Ok((vals, mults))
}

/// `start:end:count`, inclusive of both ends.
pub fn grid(s: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(input(format!("grid must be start:end:count, got {s:?}")));
    }
    let (a, b) = (real(parts[0])?, real(parts[1])?);
    let n: usize = parts[2].trim().parse().map_err(|_| input(format!("bad grid count in {s:?}")))?;
    Ok(match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        assert_eq!(complex("1.5").unwrap(), Complex64::new(1.5, 0.0));
        assert_eq!(complex("1+2i").unwrap(), Complex64::new(1.0, 2.0));
        assert_eq!(complex("-0.5-0.25i").unwrap(), Complex64::new(-0.5, -0.25));
        assert_eq!(complex("i").unwrap(), Complex64::new(0.0, 1.0));
        assert_eq!(complex("-i").unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(complex("1e-3+2e+1i").unwrap(), Complex64::new(1e-3, 20.0));
        assert_eq!(complex("1/2").unwrap(), Complex64::new(0.5, 0.0));
        assert!(complex("x").is_err());
    }

    #[test]
    fn value_lists() {
        let (v, m) = values("2,3:2").unwrap();
        assert_eq!(v, vec![Complex64::new(2.0, 0.0), Complex64::new(3.0, 0.0)]);
        assert_eq!(m, vec![1, 2]);
        assert_eq!(grid("-0.4:0.4:3").unwrap(), vec![-0.4, 0.0, 0.4]);
    }
}
