use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DVector;
use num_traits::{One, Zero};

use super::{CausticSet, ConfocalFamily, FLOAT_TIE_TOLERANCE};
use crate::error::{Error, Result};
use crate::numeric::{nearly_equal, Rational};
use crate::poly::Poly;

fn factor<T>(b: &T) -> Poly<T>
where
    T: Clone + Zero + One + PartialEq + Neg<Output = T>,
    for<'a> &'a T: Add<&'a T, Output = T> + Sub<&'a T, Output = T> + Mul<&'a T, Output = T>,
{
    Poly::new(vec![b.clone(), -T::one()])
}

fn prod_except<T>(b: &[T], skip: &[usize]) -> Poly<T>
where
    T: Clone + Zero + One + PartialEq + Neg<Output = T>,
    for<'a> &'a T: Add<&'a T, Output = T> + Sub<&'a T, Output = T> + Mul<&'a T, Output = T>,
{
    b.iter()
        .enumerate()
        .filter(|(k, _)| !skip.contains(k))
        .fold(Poly::constant(T::one()), |acc, (_, bk)| acc.mul(&factor(bk)))
}

/// `∏(b_i − μ)²` times the tangency discriminant of `μ ↦ Q_μ(x0 + t v)`:
/// `(Σ x_i v_i W_i)² − (Σ v_i² W_i)(Σ x_i² W_i − W)` with `W = ∏(b_k − μ)`,
/// `W_i = W/(b_i − μ)`.
pub fn cleared_discriminant<T>(b: &[T], x0: &[T], v: &[T]) -> Poly<T>
where
    T: Clone + Zero + One + PartialEq + Neg<Output = T>,
    for<'a> &'a T: Add<&'a T, Output = T> + Sub<&'a T, Output = T> + Mul<&'a T, Output = T>,
{
    let d = b.len();
    let w = prod_except(b, &[]);
    let mut xv = Poly::constant(T::zero());
    let mut vv = Poly::constant(T::zero());
    let mut xx = w.scale(&-T::one());
    for i in 0..d {
        let wi = prod_except(b, &[i]);
        xv = xv.add(&wi.scale(&(&x0[i] * &v[i])));
        vv = vv.add(&wi.scale(&(&v[i] * &v[i])));
        xx = xx.add(&wi.scale(&(&x0[i] * &x0[i])));
    }
    xv.mul(&xv).sub(&vv.mul(&xx))
}

/// Degree-(d−1) caustic polynomial `Σ v_i² W_i − Σ_{i<j} (x_i v_j − x_j v_i)² W_ij`;
/// equals the cleared discriminant divided by `∏(b_k − μ)`.
pub fn caustic_polynomial<T>(b: &[T], x0: &[T], v: &[T]) -> Poly<T>
where
    T: Clone + Zero + One + PartialEq + Neg<Output = T>,
    for<'a> &'a T: Add<&'a T, Output = T> + Sub<&'a T, Output = T> + Mul<&'a T, Output = T>,
{
    let d = b.len();
    let mut p = Poly::constant(T::zero());
    for i in 0..d {
        p = p.add(&prod_except(b, &[i]).scale(&(&v[i] * &v[i])));
        for j in i + 1..d {
            let m = &(&x0[i] * &v[j]) - &(&x0[j] * &v[i]);
            p = p.sub(&prod_except(b, &[i, j]).scale(&(&m * &m)));
        }
    }
    p
}

/// Caustic parameters of the line `x0 + t v`, computed in floating point.
pub fn line_caustics(family: &ConfocalFamily, x0: &DVector<f64>, v: &DVector<f64>) -> Result<CausticSet> {
    let d = family.dim();
    if v.iter().all(|&c| c == 0.0) {
        return Err(Error::ZeroDirection);
    }
    if x0.len() != d || v.len() != d {
        return Err(Error::InvalidParameters("point and direction must have dimension d".into()));
    }
    // Scale-free: normalise v so that the leading coefficient is ±1.
    let vn = v / v.norm();
    let p = caustic_polynomial(family.b_f64(), x0.as_slice(), vn.as_slice());
    let params = p.real_roots();
    debug_assert_eq!(params.len(), d - 1);
    let degenerate = params
        .iter()
        .map(|&m| family.b_f64().iter().any(|&b| nearly_equal(m, b, FLOAT_TIE_TOLERANCE)))
        .collect();
    Ok(CausticSet { params, degenerate })
}

/// Exact caustic polynomial for rational data, obtained by clearing the
/// discriminant and removing the factor `∏(b_k − μ)` with a zero-remainder check.
/// The flags mark the family parameters `b_i` that are roots.
pub fn line_caustics_exact(family: &ConfocalFamily, x0: &[Rational], v: &[Rational]) -> Result<(Poly<Rational>, Vec<bool>)> {
    if v.iter().all(Zero::is_zero) {
        return Err(Error::ZeroDirection);
    }
    let b = family.b();
    let cleared = cleared_discriminant(b, x0, v);
    let w = prod_except(b, &[]);
    let (q, r) = cleared.div_rem(&w);
    assert!(r.is_zero(), "spurious factor did not divide the cleared discriminant");
    debug_assert_eq!(q, caustic_polynomial(b, x0, v));
    let flags = b.iter().map(|bi| q.eval(bi).is_zero()).collect();
    Ok((q, flags))
}
