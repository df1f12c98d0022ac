use std::collections::BTreeMap;
use std::fmt::Write;
use std::ops::{Add, Div, Mul, Neg, Sub};

use nalgebra::DVector;
use num_traits::{FromPrimitive, One, Signed, Zero};

use super::Potential;
use crate::error::{Error, Result};
use crate::numeric::{fmt_rational, int, parse_rational, to_f64, Rational};

/// Sparse Laurent polynomial `Σ p_i x^i` with exact coefficients. Exponent
/// vectors are stored without trailing zeros, so constants carry no
/// dimension and polynomials in fewer variables embed in more.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct LaurentPolynomial {
    terms: BTreeMap<Vec<i32>, Rational>,
}

fn trim(mut e: Vec<i32>) -> Vec<i32> {
    while e.last() == Some(&0) {
        e.pop();
    }
    e
}

fn exp_at(e: &[i32], i: usize) -> i32 {
    e.get(i).copied().unwrap_or(0)
}

fn bump(e: &[i32], i: usize, by: i32) -> Vec<i32> {
    let mut out = e.to_vec();
    if out.len() <= i {
        out.resize(i + 1, 0);
    }
    out[i] += by;
    trim(out)
}

impl LaurentPolynomial {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(&[], c)
    }

    pub fn monomial(exponents: &[i32], c: Rational) -> Self {
        let mut p = Self::new();
        p.add_term(exponents.to_vec(), c);
        p
    }

    /// The coordinate `x_i` (0-based).
    pub fn variable(i: usize) -> Self {
        Self::monomial(&bump(&[], i, 1), int(1))
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Vec<i32>, Rational)>) -> Self {
        let mut p = Self::new();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn add_term(&mut self, exponents: Vec<i32>, c: Rational) {
        if c.is_zero() {
            return;
        }
        let key = trim(exponents);
        let entry = self.terms.entry(key.clone()).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[i32], &Rational)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exponents: &[i32]) -> Rational {
        self.terms.get(&trim(exponents.to_vec())).cloned().unwrap_or_else(Rational::zero)
    }

    /// Number of variables actually used.
    pub fn nvars(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }

    pub fn is_polynomial(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&v| v >= 0))
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(&[])
    }

    /// Smallest and largest total degree, `None` for the zero polynomial.
    pub fn degree_range(&self) -> Option<(i32, i32)> {
        let degs = self.terms.keys().map(|e| e.iter().sum::<i32>());
        degs.fold(None, |acc, g| match acc {
            None => Some((g, g)),
            Some((lo, hi)) => Some((lo.min(g), hi.max(g))),
        })
    }

    /// Terms of total degree `g`.
    pub fn homogeneous_part(&self, g: i32) -> Self {
        Self::from_terms(self.terms.iter().filter(|(e, _)| e.iter().sum::<i32>() == g).map(|(e, c)| (e.clone(), c.clone())))
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self::from_terms(self.terms.iter().map(|(e, c)| (e.clone(), c * s)))
    }

    /// Multiplication by `x_i^by`.
    pub fn shift(&self, i: usize, by: i32) -> Self {
        Self::from_terms(self.terms.iter().map(|(e, c)| (bump(e, i, by), c.clone())))
    }

    /// `∂/∂x_i`.
    pub fn partial(&self, i: usize) -> Self {
        Self::from_terms(self.terms.iter().map(|(e, c)| {
            let k = exp_at(e, i);
            (bump(e, i, -1), c * int(k as i64))
        }))
    }

    /// Euler operator `Σ_k x_k ∂/∂x_k`: each term times its total degree.
    pub fn euler(&self) -> Self {
        Self::from_terms(self.terms.iter().map(|(e, c)| (e.clone(), c * int(e.iter().sum::<i32>() as i64))))
    }

    /// Antiderivative in `x_i` with no `x_i`-free terms added; `None` when a
    /// term `x_i^{−1}` would need a logarithm.
    pub fn integrate(&self, i: usize) -> Option<Self> {
        let mut out = Self::new();
        for (e, c) in &self.terms {
            let k = exp_at(e, i);
            if k == -1 {
                return None;
            }
            out.add_term(bump(e, i, 1), c / int(k as i64 + 1));
        }
        Some(out)
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::one(), |acc, _| &acc * self)
    }

    pub fn eval_exact(&self, x: &[Rational]) -> Result<Rational> {
        let mut total = Rational::zero();
        for (e, c) in &self.terms {
            let mut m = c.clone();
            for (i, &k) in e.iter().enumerate() {
                let xi = x.get(i).ok_or_else(|| Error::InvalidParameters("point has too few coordinates".into()))?;
                if k < 0 && xi.is_zero() {
                    return Err(Error::InvalidParameters(format!("x_{} = 0 is a pole", i + 1)));
                }
                m *= pow_rational(xi, k);
            }
            total += m;
        }
        Ok(total)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| e.iter().enumerate().fold(to_f64(c), |m, (i, &k)| m * x.get(i).copied().unwrap_or(0.0).powi(k)))
            .sum()
    }

    pub fn gradient_at(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        for (e, c) in &self.terms {
            let c = to_f64(c);
            for (i, gi) in g.iter_mut().enumerate() {
                let k = exp_at(e, i);
                if k == 0 {
                    continue;
                }
                let m = (0..x.len()).fold(c * k as f64, |m, j| {
                    let kj = exp_at(e, j) - i32::from(j == i);
                    m * x[j].powi(kj)
                });
                *gi += m;
            }
        }
        g
    }

    /// One line per term: `i_1 … i_d : p/q`.
    pub fn to_text(&self, d: usize) -> String {
        let mut out = String::new();
        for (e, c) in &self.terms {
            let exps: Vec<String> = (0..d).map(|i| exp_at(e, i).to_string()).collect();
            writeln!(out, "{} : {}", exps.join(" "), fmt_rational(c)).unwrap();
        }
        out
    }

    /// Inverse of [`to_text`](Self::to_text); blank lines and `#` comments are
    /// skipped. Returns the polynomial and the number of exponent columns.
    pub fn from_text(s: &str) -> Result<(Self, usize)> {
        let mut p = Self::new();
        let mut width = None;
        for (no, line) in s.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |what: &str| Error::Parse(format!("line {}: {what}", no + 1));
            let (lhs, rhs) = line.split_once(':').ok_or_else(|| bad("missing `:`"))?;
            let exps: Vec<i32> = lhs
                .split_whitespace()
                .map(|t| t.parse::<i32>().map_err(|_| bad("exponent is not an integer")))
                .collect::<Result<_>>()?;
            if *width.get_or_insert(exps.len()) != exps.len() {
                return Err(bad("inconsistent number of exponents"));
            }
            p.add_term(exps, parse_rational(rhs)?);
        }
        Ok((p, width.unwrap_or(0)))
    }

    /// Human-readable rendering such as `3/2 x1^2 x2^-2 - x3`.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        let mut keys: Vec<&Vec<i32>> = self.terms.keys().collect();
        keys.sort_by_key(|e| (e.iter().sum::<i32>(), std::cmp::Reverse((*e).clone())));
        for (n, e) in keys.into_iter().enumerate() {
            let c = &self.terms[e];
            let neg = c.is_negative();
            if n == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mag = c.abs();
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k != 0)
                .map(|(i, &k)| if k == 1 { format!("x{}", i + 1) } else { format!("x{}^{}", i + 1, k) })
                .collect();
            if mono.is_empty() || !mag.is_one() {
                out.push_str(&if mag.is_integer() { mag.numer().to_string() } else { fmt_rational(&mag) });
                if !mono.is_empty() {
                    out.push(' ');
                }
            }
            out.push_str(&mono.join(" "));
        }
        out
    }
}

fn pow_rational(x: &Rational, k: i32) -> Rational {
    if k >= 0 {
        num_traits::pow(x.clone(), k as usize)
    } else {
        num_traits::pow(x.recip(), (-k) as usize)
    }
}

impl Add<&LaurentPolynomial> for &LaurentPolynomial {
    type Output = LaurentPolynomial;

    fn add(self, rhs: &LaurentPolynomial) -> LaurentPolynomial {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Sub<&LaurentPolynomial> for &LaurentPolynomial {
    type Output = LaurentPolynomial;

    fn sub(self, rhs: &LaurentPolynomial) -> LaurentPolynomial {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }
}

impl Mul<&LaurentPolynomial> for &LaurentPolynomial {
    type Output = LaurentPolynomial;

    fn mul(self, rhs: &LaurentPolynomial) -> LaurentPolynomial {
        let mut out = LaurentPolynomial::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let n = e1.len().max(e2.len());
                let e: Vec<i32> = (0..n).map(|i| exp_at(e1, i) + exp_at(e2, i)).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }
}

/// Division by a nonzero constant polynomial only.
impl Div<&LaurentPolynomial> for &LaurentPolynomial {
    type Output = LaurentPolynomial;

    fn div(self, rhs: &LaurentPolynomial) -> LaurentPolynomial {
        assert!(
            rhs.terms.len() == 1 && rhs.terms.contains_key(&Vec::new()),
            "division by a non-constant Laurent polynomial"
        );
        self.scale(&rhs.constant_term().recip())
    }
}

macro_rules! owned_op {
    ($tr:ident, $f:ident) => {
        impl $tr for LaurentPolynomial {
            type Output = LaurentPolynomial;

            fn $f(self, rhs: LaurentPolynomial) -> LaurentPolynomial {
                (&self).$f(&rhs)
            }
        }
    };
}

owned_op!(Add, add);
owned_op!(Sub, sub);
owned_op!(Mul, mul);

impl Neg for LaurentPolynomial {
    type Output = LaurentPolynomial;

    fn neg(self) -> LaurentPolynomial {
        self.scale(&-int(1))
    }
}

impl Zero for LaurentPolynomial {
    fn zero() -> Self {
        Self::new()
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for LaurentPolynomial {
    fn one() -> Self {
        Self::constant(int(1))
    }
}

impl FromPrimitive for LaurentPolynomial {
    fn from_i64(n: i64) -> Option<Self> {
        Some(Self::constant(int(n)))
    }

    fn from_u64(n: u64) -> Option<Self> {
        Rational::from_u64(n).map(Self::constant)
    }
}

impl Potential for LaurentPolynomial {
    fn value(&self, x: &DVector<f64>) -> f64 {
        self.eval(x.as_slice())
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_vec(self.gradient_at(x.as_slice()))
    }
}
