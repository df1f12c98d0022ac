use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::rank::rank_exact;
use super::series::{sqrt_series, sqrt_series_f64, RationalSeries};
use crate::confocal::{MinkowskiEllipsoid, FLOAT_TIE_TOLERANCE};
use crate::error::{Error, Result};
use crate::numeric::{fmt_rational, nearly_equal, to_f64, Rational};
use crate::poly::Poly;

/// Singular-curve classification of the spectral curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Degeneracy {
    None,
    /// `a_i = μ_j`: the caustic degenerates into a coordinate hyperplane.
    CaseI,
    /// `a_i = a_j`: symmetric ellipsoid.
    CaseIi,
    /// `μ_i = μ_j`: trajectory lies on a confocal quadric.
    CaseIii,
}

/// Outcome of the rank test. `periodic` is `None` when the test does not apply
/// at this dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicityVerdict {
    pub n: usize,
    pub d: usize,
    pub periodic: Option<bool>,
    pub rank: Option<usize>,
    pub threshold: usize,
    pub degeneracy: Degeneracy,
    pub reason: Option<String>,
    /// Double points of the spectral curve, as `p/q`.
    pub double_points: Vec<String>,
    /// Constant of the spectral curve equation; it rescales `y` only.
    pub spectral_constant: String,
}

/// Roots `a_0, …, a_d, μ_1, …, μ_{d−1}` of the spectral polynomial.
pub fn spectral_roots(e: &MinkowskiEllipsoid) -> Vec<Rational> {
    e.a().iter().chain(e.mu()).cloned().collect()
}

pub fn spectral_polynomial(e: &MinkowskiEllipsoid) -> Poly<Rational> {
    Poly::from_roots(spectral_roots(e).iter())
}

/// Degeneracy class and the list of double roots.
pub fn classify(e: &MinkowskiEllipsoid) -> Result<(Degeneracy, Vec<Rational>)> {
    let mut mult: BTreeMap<Rational, usize> = BTreeMap::new();
    for r in spectral_roots(e) {
        if r.is_zero() {
            return Err(Error::ZeroParameter);
        }
        *mult.entry(r).or_default() += 1;
    }
    if let Some((r, m)) = mult.iter().find(|(_, &m)| m >= 3) {
        return Err(Error::HigherMultiplicity(format!("root {} has multiplicity {m}", fmt_rational(r))));
    }
    let doubles: Vec<Rational> = mult.into_iter().filter(|(_, m)| *m == 2).map(|(r, _)| r).collect();
    let case_i = e.a().iter().any(|a| e.mu().contains(a));
    let case_iii = e.mu().iter().enumerate().any(|(i, m)| e.mu()[i + 1..].contains(m));
    let class = if case_i {
        Degeneracy::CaseI
    } else if case_iii {
        Degeneracy::CaseIii
    } else if doubles.is_empty() {
        Degeneracy::None
    } else {
        Degeneracy::CaseIi
    };
    Ok((class, doubles))
}

/// Series indices of the periodicity matrix: row `r = 1…n−1`, column
/// `j = 0…n−d`, entry `n + r − j`.
pub fn hankel_indices(n: usize, d: usize) -> Vec<Vec<usize>> {
    (1..n).map(|r| (0..=n - d).map(|j| n + r - j).collect()).collect()
}

/// The `(n−1) × (n−d+1)` periodicity matrix with entries `T_k`.
pub fn hankel_matrix(series: &RationalSeries, n: usize, d: usize) -> Result<Vec<Vec<Rational>>> {
    if n < d || d < 2 {
        return Err(Error::InvalidParameters(format!("periodicity matrix needs n ≥ d, got n = {n}, d = {d}")));
    }
    if series.order() < 2 * n - 1 {
        return Err(Error::InsufficientOrder { needed: 2 * n - 1, available: series.order() });
    }
    Ok(hankel_indices(n, d)
        .into_iter()
        .map(|row| row.into_iter().map(|k| series.coeff(k).clone()).collect())
        .collect())
}

fn verdict(e: &MinkowskiEllipsoid, n: usize, class: Degeneracy, doubles: &[Rational]) -> PeriodicityVerdict {
    let d = e.dim();
    PeriodicityVerdict {
        n,
        d,
        periodic: None,
        rank: None,
        threshold: (n + 1).saturating_sub(d),
        degeneracy: class,
        reason: None,
        double_points: doubles.iter().map(fmt_rational).collect(),
        spectral_constant: "1".into(),
    }
}

/// Periodicity of billiard trajectories with the caustics of `e` after `n`
/// bounces, decided by the exact rank test on the full spectral curve.
pub fn cayley_condition(e: &MinkowskiEllipsoid, n: usize) -> Result<PeriodicityVerdict> {
    if n == 0 {
        return Err(Error::InvalidParameters("n must be ≥ 1".into()));
    }
    let (class, doubles) = classify(e)?;
    let mut v = verdict(e, n, class, &doubles);
    let d = e.dim();
    if class == Degeneracy::CaseI {
        v.reason = Some("caustic degenerates into a coordinate hyperplane; rerun in dimension d-1".into());
        return Ok(v);
    }
    if n < d {
        v.periodic = Some(false);
        v.reason = Some("n<d".into());
        return Ok(v);
    }
    let series = sqrt_series(&spectral_polynomial(e), 2 * n - 1)?;
    let rank = rank_exact(&hankel_matrix(&series, n, d)?);
    v.rank = Some(rank);
    v.periodic = Some(rank < v.threshold);
    Ok(v)
}

/// Same verdict computed on the normalisation of a curve with exactly one
/// ordinary double point `r`: `y = (x − r) ỹ`, basis `1, f_0, f_1, …, f_{n−g}`
/// with the gluing condition `f(A) = f(B)` at the two preimages of `r`.
pub fn cayley_condition_normalized(e: &MinkowskiEllipsoid, n: usize) -> Result<PeriodicityVerdict> {
    if n == 0 {
        return Err(Error::InvalidParameters("n must be ≥ 1".into()));
    }
    let (class, doubles) = classify(e)?;
    if doubles.len() != 1 || class == Degeneracy::CaseI {
        return Err(Error::InvalidParameters(
            "the normalised route needs exactly one double point of type (ii) or (iii)".into(),
        ));
    }
    let mut v = verdict(e, n, class, &doubles);
    let g = e.dim() - 1;
    if n <= g {
        v.periodic = Some(false);
        v.reason = Some("n<d".into());
        return Ok(v);
    }
    let r = &doubles[0];
    let mut reduced = spectral_roots(e);
    for _ in 0..2 {
        let pos = reduced.iter().position(|x| x == r).expect("double root present");
        reduced.remove(pos);
    }
    let tilde = sqrt_series(&Poly::from_roots(reduced.iter()), 2 * n - 1)?;
    // y / B_0 = (1 − x/r) ỹ / B̃_0
    let full: Vec<Rational> = (0..2 * n)
        .map(|k| {
            let prev = if k == 0 { Rational::zero() } else { tilde.coeff(k - 1) / r };
            tilde.coeff(k) - prev
        })
        .collect();
    let unknowns = n - g + 1;
    let mut m = Vec::with_capacity(n);
    let mut gluing = vec![Rational::zero(); unknowns];
    gluing[0] = Rational::one();
    m.push(gluing);
    for row in 1..n {
        let mut line = vec![tilde.coeff(g + row).clone()];
        line.extend((1..=n - g).map(|k| full[g + k + row].clone()));
        m.push(line);
    }
    let rank = rank_exact(&m);
    v.rank = Some(rank);
    v.threshold = unknowns;
    v.periodic = Some(rank < unknowns);
    Ok(v)
}

/// Continuous surrogate of the rank test: smallest singular value of the
/// periodicity matrix built from `T_k ρ^k`, `ρ` the smallest root modulus.
/// The rescaling multiplies rows and columns by powers of `ρ`, so it keeps the
/// rank and makes the value invariant under `(a, μ) ↦ s(a, μ)`.
pub fn period_indicator_f64(a: &[f64], mu: &[f64], n: usize) -> Result<f64> {
    let d = a.len().saturating_sub(1);
    if d < 2 || mu.len() != d - 1 {
        return Err(Error::InvalidParameters("expected d+1 values of a and d-1 values of μ".into()));
    }
    if n < d {
        return Err(Error::InvalidParameters(format!("indicator needs n ≥ d, got n = {n}, d = {d}")));
    }
    let roots: Vec<f64> = a.iter().chain(mu).copied().collect();
    if roots.iter().any(|&r| r == 0.0 || nearly_equal(r, 0.0, FLOAT_TIE_TOLERANCE)) {
        return Err(Error::ZeroParameter);
    }
    let rho = roots.iter().fold(f64::INFINITY, |m, r| m.min(r.abs()));
    let t = sqrt_series_f64(&Poly::from_roots(roots.iter()), 2 * n - 1)?;
    let scaled: Vec<f64> = t.iter().enumerate().map(|(k, c)| c * rho.powi(k as i32)).collect();
    let idx = hankel_indices(n, d);
    let m = DMatrix::from_fn(n - 1, n - d + 1, |i, j| scaled[idx[i][j]]);
    let sv = m.svd(false, false).singular_values;
    Ok(sv.min())
}

pub fn period_indicator(e: &MinkowskiEllipsoid, n: usize) -> Result<f64> {
    let a: Vec<f64> = e.a().iter().map(to_f64).collect();
    let mu: Vec<f64> = e.mu().iter().map(to_f64).collect();
    period_indicator_f64(&a, &mu, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{int, rat};

    fn ell(a: &[i64], mu: Rational) -> MinkowskiEllipsoid {
        MinkowskiEllipsoid::new(a.iter().map(|&v| int(v)).collect(), vec![mu]).unwrap()
    }

    #[test]
    fn index_patterns() {
        assert_eq!(hankel_indices(3, 2), vec![vec![4, 3], vec![5, 4]]);
        assert_eq!(hankel_indices(2, 2), vec![vec![3]]);
        assert_eq!(hankel_indices(3, 3), vec![vec![4], vec![5]]);
        let idx = hankel_indices(5, 3);
        assert_eq!(idx[0], vec![6, 5, 4]);
        assert_eq!(idx[3], vec![9, 8, 7]);
    }

    #[test]
    fn rational_witness() {
        let e = ell(&[4, 2, 1], rat(4, 5));
        let v = cayley_condition(&e, 4).unwrap();
        assert_eq!(v.periodic, Some(true));
        assert_eq!(v.rank, Some(2));
        assert!(period_indicator(&e, 4).unwrap() < 1e-10);
        assert_eq!(cayley_condition(&e, 3).unwrap().periodic, Some(false));
        assert_eq!(cayley_condition(&e, 8).unwrap().periodic, Some(true));
        let near = ell(&[4, 2, 1], rat(4, 5) + rat(1, 1000));
        assert_eq!(cayley_condition(&near, 4).unwrap().periodic, Some(false));
    }

    #[test]
    fn small_n_is_refuted() {
        let e = ell(&[4, 2, 1], rat(3, 2));
        let v = cayley_condition(&e, 1).unwrap();
        assert_eq!(v.periodic, Some(false));
        assert_eq!(v.reason.as_deref(), Some("n<d"));
    }

    #[test]
    fn case_i_is_undecided() {
        let e = ell(&[4, 2, 1], int(2));
        let v = cayley_condition(&e, 3).unwrap();
        assert_eq!(v.degeneracy, Degeneracy::CaseI);
        assert_eq!(v.periodic, None);
    }

    #[test]
    fn triple_root_rejected() {
        let e = MinkowskiEllipsoid::new(vec![int(5), int(2), int(2), int(1)], vec![int(2), int(3)]).unwrap();
        assert!(matches!(cayley_condition(&e, 3), Err(Error::HigherMultiplicity(_))));
    }

    #[test]
    fn example_one_no_period_three() {
        let e = MinkowskiEllipsoid::new(vec![int(5), int(3), int(2), int(1)], vec![rat(3, 2), rat(3, 2)]).unwrap();
        let full = cayley_condition(&e, 3).unwrap();
        assert_eq!(full.degeneracy, Degeneracy::CaseIii);
        assert_eq!(full.periodic, Some(false));
        assert_eq!(cayley_condition_normalized(&e, 3).unwrap().periodic, Some(false));
    }
}
