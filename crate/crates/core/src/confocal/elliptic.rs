use nalgebra::{DMatrix, DVector};

use super::{ConfocalFamily, EllipticCoords};
use crate::error::{Error, Result};
use crate::poly::Poly;

/// Elliptic coordinates of `x`: the roots of `Σ x_i²/(b_i − λ) = 1`, one in each
/// interval `(b_{j+1}, b_j)` and the last one below `b_d`.
pub fn to_elliptic(family: &ConfocalFamily, x: &DVector<f64>) -> Result<EllipticCoords> {
    family.require_strict()?;
    let b = family.b_f64();
    let d = b.len();
    if x.len() != d {
        return Err(Error::InvalidParameters(format!("point has {} entries, expected {d}", x.len())));
    }
    if let Some(axis) = x.iter().position(|&xi| xi == 0.0) {
        return Err(Error::DegenerateChart { axis, lambda: cleared_roots(b, x) });
    }
    let r2 = x.norm_squared();
    let h = |l: f64| family.gamma(x, l) - 1.0;
    let dh = |l: f64| -> f64 { b.iter().zip(x.iter()).map(|(bi, xi)| xi * xi / ((bi - l) * (bi - l))).sum() };
    let mut lambda = Vec::with_capacity(d);
    for j in 0..d {
        let hi = b[j];
        let lo = if j + 1 < d { b[j + 1] } else { b[d - 1] - r2 - 1.0 };
        lambda.push(bracketed_root(&h, &dh, lo, hi));
    }
    Ok(EllipticCoords::new(lambda))
}

/// Root of an increasing function with a pole at `hi` (and at `lo` unless it
/// is a finite lower bound with `h(lo) < 0`).
fn bracketed_root(h: &impl Fn(f64) -> f64, dh: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let (mut a, mut c) = (lo, hi);
    for _ in 0..200 {
        let m = 0.5 * (a + c);
        if m <= a || m >= c {
            break;
        }
        if h(m) < 0.0 {
            a = m;
        } else {
            c = m;
        }
        if c - a <= 1e-9 * (1.0 + c.abs()) {
            break;
        }
    }
    let mut l = 0.5 * (a + c);
    for _ in 0..30 {
        let step = h(l) / dh(l);
        let next = l - step;
        if !(next > a && next < c) || !next.is_finite() {
            break;
        }
        if (next - l).abs() <= f64::EPSILON * (1.0 + l.abs()) {
            l = next;
            break;
        }
        if h(next) < 0.0 {
            a = next;
        } else {
            c = next;
        }
        l = next;
    }
    l
}

/// Roots of `∏(b_i − λ) − Σ x_i² ∏_{j≠i}(b_j − λ)`, descending.
fn cleared_roots(b: &[f64], x: &DVector<f64>) -> Vec<f64> {
    let lin = |bi: f64| Poly::new(vec![bi, -1.0]);
    let mut p = b.iter().fold(Poly::constant(1.0), |acc, &bi| acc.mul(&lin(bi)));
    for i in 0..b.len() {
        let w = b
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .fold(Poly::constant(1.0), |acc, (_, &bj)| acc.mul(&lin(bj)));
        p = p.sub(&w.scale(&(x[i] * x[i])));
    }
    p.real_roots()
}

/// Inverse chart: `x_i² = ∏_j(b_i − λ_j)/∏_{j≠i}(b_i − b_j)`, signs select the orthant.
pub fn from_elliptic(family: &ConfocalFamily, lambda: &EllipticCoords, signs: &[bool]) -> Result<DVector<f64>> {
    family.require_strict()?;
    let b = family.b_f64();
    let d = b.len();
    if !lambda.interlaces(family) || signs.len() != d {
        return Err(Error::InterlacingViolated);
    }
    Ok(DVector::from_iterator(
        d,
        (0..d).map(|i| {
            let num: f64 = lambda.lambda.iter().map(|l| b[i] - l).product();
            let den: f64 = (0..d).filter(|&j| j != i).map(|j| b[i] - b[j]).product();
            let xi = (num / den).max(0.0).sqrt();
            if signs[i] {
                xi
            } else {
                -xi
            }
        }),
    ))
}

/// `∂x_i/∂λ_j = x_i / (2(λ_j − b_i))`.
pub fn elliptic_jacobian(family: &ConfocalFamily, x: &DVector<f64>, lambda: &EllipticCoords) -> DMatrix<f64> {
    let b = family.b_f64();
    let d = b.len();
    DMatrix::from_fn(d, d, |i, j| x[i] / (2.0 * (lambda.lambda[j] - b[i])))
}
