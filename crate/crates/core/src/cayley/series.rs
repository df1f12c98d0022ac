use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::numeric::{fmt_rational, int, Rational};
use crate::poly::Poly;

/// Truncated square root `T = √(P/P(0))`, `T_0 = 1`, together with `P(0) = B_0²`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalSeries {
    coeffs: Vec<Rational>,
    b0_squared: Rational,
}

impl RationalSeries {
    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> &Rational {
        &self.coeffs[k]
    }

    pub fn b0_squared(&self) -> &Rational {
        &self.b0_squared
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// One `p/q` per line, index ordered.
    pub fn dump(&self) -> String {
        self.coeffs.iter().map(|c| fmt_rational(c) + "\n").collect()
    }

    /// The same series with odd coefficients negated: expansion of the other
    /// branch after `x ↦ −x` symmetry of the point pair over `x = 0`.
    pub fn conjugate(&self) -> Self {
        RationalSeries {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| if k % 2 == 1 { -c } else { c.clone() })
                .collect(),
            b0_squared: self.b0_squared.clone(),
        }
    }

    pub(crate) fn from_parts(coeffs: Vec<Rational>, b0_squared: Rational) -> Self {
        RationalSeries { coeffs, b0_squared }
    }
}

fn mul_trunc(a: &[Rational], b: &[Rational], len: usize) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); len];
    for (i, ai) in a.iter().enumerate().take(len) {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate().take(len - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Inverse of a series with unit constant term, modulo `x^len`.
fn inv_trunc(a: &[Rational], len: usize) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); len];
    out[0] = Rational::one() / &a[0];
    for k in 1..len {
        let mut s = Rational::zero();
        for j in 1..=k.min(a.len() - 1) {
            s += &a[j] * &out[k - j];
        }
        out[k] = -s * &out[0];
    }
    out
}

fn normalized(p: &Poly<Rational>) -> Result<(Vec<Rational>, Rational)> {
    if p.degree() < 1 {
        return Err(Error::InvalidParameters("series root needs a polynomial of degree ≥ 1".into()));
    }
    let p0 = p.coeff(0);
    if p0.is_zero() {
        return Err(Error::ZeroAtOrigin);
    }
    Ok((p.coeffs().iter().map(|c| c / &p0).collect(), p0))
}

/// `T_0 … T_N` by Newton iteration `S ← (S + Q/S)/2`, cross-checked against
/// the direct recurrence and an exact squaring test.
pub fn sqrt_series(p: &Poly<Rational>, order: usize) -> Result<RationalSeries> {
    let (q, p0) = normalized(p)?;
    let len = order + 1;
    let mut s = vec![Rational::one()];
    let half = crate::numeric::rat(1, 2);
    let mut prec = 1;
    while prec < len {
        prec = (2 * prec).min(len);
        s.resize(prec, Rational::zero());
        let qs = mul_trunc(&q, &inv_trunc(&s, prec), prec);
        s = s.iter().zip(&qs).map(|(a, b)| (a + b) * &half).collect();
    }
    let direct = sqrt_recurrence(&q, len);
    assert_eq!(s, direct, "Newton and recurrence series disagree");
    let sq = mul_trunc(&s, &s, len);
    let target: Vec<Rational> = (0..len).map(|k| q.get(k).cloned().unwrap_or_else(Rational::zero)).collect();
    assert_eq!(sq, target, "series does not square to P/P(0)");
    Ok(RationalSeries::from_parts(s, p0))
}

/// `T_k = (q_k − Σ_{0<i<k} T_i T_{k−i}) / 2`.
fn sqrt_recurrence(q: &[Rational], len: usize) -> Vec<Rational> {
    let mut t = vec![Rational::one()];
    for k in 1..len {
        let mut s = q.get(k).cloned().unwrap_or_else(Rational::zero);
        for i in 1..k {
            s -= &t[i] * &t[k - i];
        }
        t.push(s / int(2));
    }
    t
}

/// Floating version of the recurrence, used by the continuous indicator.
pub fn sqrt_series_f64(p: &Poly<f64>, order: usize) -> Result<Vec<f64>> {
    let p0 = p.coeff(0);
    if p0 == 0.0 {
        return Err(Error::ZeroAtOrigin);
    }
    let q: Vec<f64> = p.coeffs().iter().map(|c| c / p0).collect();
    let mut t = vec![1.0];
    for k in 1..=order {
        let mut s = q.get(k).copied().unwrap_or(0.0);
        for i in 1..k {
            s -= t[i] * t[k - i];
        }
        t.push(0.5 * s);
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;

    #[test]
    fn perfect_square() {
        let p = Poly::new(vec![int(1), int(-2), int(1)]);
        let s = sqrt_series(&p, 8).unwrap();
        assert_eq!(s.coeffs()[..2], [int(1), int(-1)]);
        assert!(s.coeffs()[2..].iter().all(Zero::is_zero));
    }

    #[test]
    fn binomial_example() {
        let p = Poly::from_roots([int(1), int(4)].iter());
        let s = sqrt_series(&p, 2).unwrap();
        assert_eq!(s.coeffs(), &[int(1), rat(-5, 8), rat(-9, 128)]);
        assert_eq!(s.b0_squared(), &int(4));
        assert_eq!(s.dump(), "1/1\n-5/8\n-9/128\n");
    }

    #[test]
    fn zero_at_origin() {
        let p = Poly::from_roots([int(0), int(4)].iter());
        assert_eq!(sqrt_series(&p, 3), Err(Error::ZeroAtOrigin));
    }

    #[test]
    fn float_matches_exact() {
        let roots = [int(4), int(2), int(1), rat(4, 5)];
        let exact = sqrt_series(&Poly::from_roots(roots.iter()), 12).unwrap();
        let pf = Poly::from_roots([4.0, 2.0, 1.0, 0.8].iter());
        let fl = sqrt_series_f64(&pf, 12).unwrap();
        for (a, b) in exact.coeffs().iter().zip(&fl) {
            assert!((crate::numeric::to_f64(a) - b).abs() < 1e-12 * (1.0 + b.abs()));
        }
    }
}
