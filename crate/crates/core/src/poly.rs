//! Dense univariate polynomials over a numeric field, coefficients stored in
//! ascending order.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_traits::{One, Zero};

#[derive(Debug, Clone, PartialEq)]
pub struct Poly<T> {
    coeffs: Vec<T>,
}

impl<T> Poly<T>
where
    T: Clone + Zero + One + PartialEq,
    for<'a> &'a T: Add<&'a T, Output = T> + Sub<&'a T, Output = T> + Mul<&'a T, Output = T>,
{
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(T::zero());
        }
        Poly { coeffs }
    }

    pub fn constant(c: T) -> Self {
        Poly::new(vec![c])
    }

    /// `x - r`
    pub fn linear_root(r: &T) -> Self {
        Poly::new(vec![&T::zero() - r, T::one()])
    }

    pub fn from_roots<'a>(roots: impl IntoIterator<Item = &'a T>) -> Self
    where
        T: 'a,
    {
        roots
            .into_iter()
            .fold(Poly::constant(T::one()), |acc, r| acc.mul(&Poly::linear_root(r)))
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).cloned().unwrap_or_else(T::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_zero()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> T {
        self.coeffs[self.coeffs.len() - 1].clone()
    }

    pub fn eval(&self, x: &T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| &(&acc * x) + c)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|k| &self.coeff(k) + &other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|k| &self.coeff(k) - &other.coeff(k)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![T::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        Poly::new(out)
    }

    pub fn scale(&self, s: &T) -> Self {
        Poly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn derivative(&self) -> Self
    where
        T: num_traits::FromPrimitive,
    {
        if self.coeffs.len() == 1 {
            return Poly::constant(T::zero());
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * &T::from_usize(k).expect("small integer"))
                .collect(),
        )
    }
}

impl<T> Poly<T>
where
    T: Clone + Zero + One + PartialEq + Neg<Output = T>,
    for<'a> &'a T: Add<&'a T, Output = T>
        + Sub<&'a T, Output = T>
        + Mul<&'a T, Output = T>
        + std::ops::Div<&'a T, Output = T>,
{
    /// Euclidean division over a field: `self = q * divisor + r`.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        let dd = divisor.degree();
        let lead = divisor.leading();
        let mut rem = self.coeffs.clone();
        if self.degree() < dd || self.is_zero() {
            return (Poly::constant(T::zero()), self.clone());
        }
        let mut quot = vec![T::zero(); self.degree() - dd + 1];
        for k in (0..quot.len()).rev() {
            let c = &rem[k + dd] / &lead;
            for (j, dc) in divisor.coeffs.iter().enumerate() {
                rem[k + j] = &rem[k + j] - &(&c * dc);
            }
            quot[k] = c;
        }
        rem.truncate(dd.max(1));
        (Poly::new(quot), Poly::new(rem))
    }
}

impl Poly<f64> {
    /// Real parts of all complex roots, polished by Newton steps. Intended for
    /// polynomials whose roots are known to be real.
    pub fn real_roots(&self) -> Vec<f64> {
        let n = self.degree();
        let lead = self.leading();
        let mut roots = match n {
            0 => return Vec::new(),
            1 => vec![-self.coeffs[0] / self.coeffs[1]],
            2 => {
                let (c, b, a) = (self.coeffs[0], self.coeffs[1], self.coeffs[2]);
                let disc = (b * b - 4.0 * a * c).max(0.0);
                // sign-matched form avoids cancellation
                let q = -0.5 * (b + b.signum() * disc.sqrt());
                if q == 0.0 {
                    vec![0.0, 0.0]
                } else {
                    vec![q / a, c / q]
                }
            }
            _ => {
                let mut comp = DMatrix::<f64>::zeros(n, n);
                for i in 1..n {
                    comp[(i, i - 1)] = 1.0;
                }
                for i in 0..n {
                    comp[(i, n - 1)] = -self.coeffs[i] / lead;
                }
                comp.complex_eigenvalues().iter().map(|z| z.re).collect()
            }
        };
        let dp = self.derivative();
        for r in roots.iter_mut() {
            for _ in 0..3 {
                let d = dp.eval(r);
                if d == 0.0 {
                    break;
                }
                let step = self.eval(r) / d;
                if !step.is_finite() || step.abs() > 1e-6 * (1.0 + r.abs()) {
                    break;
                }
                *r -= step;
            }
        }
        roots.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        roots
    }
}
