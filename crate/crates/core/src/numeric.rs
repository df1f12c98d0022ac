//! Exact rational helpers and the mixed exact/float number used by the
//! command-line front end.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn to_f64(r: &Rational) -> f64 {
    // Ratio::to_f64 handles huge numerators/denominators without overflow.
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Exact dyadic value of a finite float.
pub fn from_f64(x: f64) -> Result<Rational> {
    Rational::from_f64(x).ok_or_else(|| Error::Parse(format!("non-finite value {x}")))
}

/// Renders as `p/q`, always with an explicit denominator.
pub fn fmt_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `p/q` or an integer literal.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("`{s}` is not a rational of the form p/q"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
            let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
            if q.is_zero() {
                return Err(Error::Parse(format!("`{s}` has a zero denominator")));
            }
            Ok(Rational::new(p, q))
        }
        None => BigInt::from_str(s).map(Rational::from_integer).map_err(|_| bad()),
    }
}

/// A scalar that remembers whether it was given exactly.
#[derive(Debug, Clone, PartialEq)]
pub enum Number {
    Exact(Rational),
    Float(f64),
}

impl Number {
    pub fn is_exact(&self) -> bool {
        matches!(self, Number::Exact(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Exact(r) => to_f64(r),
            Number::Float(x) => *x,
        }
    }

    /// Exact value; floats are converted to their dyadic value.
    pub fn to_rational(&self) -> Result<Rational> {
        match self {
            Number::Exact(r) => Ok(r.clone()),
            Number::Float(x) => from_f64(*x),
        }
    }
}

impl FromStr for Number {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if let Ok(r) = parse_rational(t) {
            return Ok(Number::Exact(r));
        }
        t.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .map(Number::Float)
            .ok_or_else(|| Error::Parse(format!("`{t}` is neither p/q nor a finite float")))
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Exact(r) => f.write_str(&fmt_rational(r)),
            Number::Float(x) => write!(f, "{x:e}"),
        }
    }
}

/// Arithmetic mode recorded in every emitted report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

impl Mode {
    pub fn of(values: &[Number]) -> Mode {
        if values.iter().all(Number::is_exact) {
            Mode::Exact
        } else {
            Mode::Float
        }
    }
}

/// Parses a comma-separated vector of numbers.
pub fn parse_vector(s: &str) -> Result<Vec<Number>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(Number::from_str)
        .collect()
}

/// Relative tie test used for float parameters.
pub fn nearly_equal(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rationals_and_integers() {
        assert_eq!(parse_rational("3/2").unwrap(), rat(3, 2));
        assert_eq!(parse_rational("-4").unwrap(), int(-4));
        assert_eq!(parse_rational(" 6/4 ").unwrap(), rat(3, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("0.5").is_err());
    }

    #[test]
    fn number_mode_detection() {
        let v = parse_vector("4,2,1").unwrap();
        assert_eq!(Mode::of(&v), Mode::Exact);
        let v = parse_vector("4,2.5,1").unwrap();
        assert_eq!(Mode::of(&v), Mode::Float);
        assert_eq!(Number::from_str("0.5").unwrap().to_rational().unwrap(), rat(1, 2));
    }

    #[test]
    fn formats_with_denominator() {
        assert_eq!(fmt_rational(&int(3)), "3/1");
        assert_eq!(fmt_rational(&rat(-5, 8)), "-5/8");
    }
}
