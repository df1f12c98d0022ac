use num_traits::{Signed, Zero};

use super::{BoundaryQuadric, ConfocalFamily};
use crate::error::{Error, Result};
use crate::numeric::{fmt_rational, Rational};

/// Ellipsoid `ξ_0²/a_0 − Σ ξ_i²/a_i = 0` in Minkowski space together with the
/// caustic parameters `μ_1, …, μ_{d−1}` of the pencil `Σ_{i≥0} ±ξ_i²/(a_i − μ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinkowskiEllipsoid {
    a: Vec<Rational>,
    mu: Vec<Rational>,
}

impl MinkowskiEllipsoid {
    /// `a_0 > a_1 ≥ … ≥ a_d > 0`, `d ≥ 2`, `d − 1` nonzero caustic parameters.
    pub fn new(a: Vec<Rational>, mu: Vec<Rational>) -> Result<Self> {
        if a.len() < 3 {
            return Err(Error::InvalidParameters("need a_0, …, a_d with d ≥ 2".into()));
        }
        let ordered = a[0] > a[1] && a[1..].windows(2).all(|w| w[0] >= w[1]) && a[a.len() - 1].is_positive();
        if !ordered {
            return Err(Error::OrderingViolated(format!(
                "a = ({}) must satisfy a_0 > a_1 ≥ … ≥ a_d > 0",
                a.iter().map(fmt_rational).collect::<Vec<_>>().join(", ")
            )));
        }
        let d = a.len() - 1;
        if mu.len() != d - 1 {
            return Err(Error::InvalidParameters(format!("expected {} caustic parameters, got {}", d - 1, mu.len())));
        }
        if mu.iter().any(Zero::is_zero) || a.iter().any(Zero::is_zero) {
            return Err(Error::ZeroParameter);
        }
        Ok(MinkowskiEllipsoid { a, mu })
    }

    pub fn dim(&self) -> usize {
        self.a.len() - 1
    }

    pub fn a(&self) -> &[Rational] {
        &self.a
    }

    pub fn mu(&self) -> &[Rational] {
        &self.mu
    }

    pub fn with_mu(&self, mu: Vec<Rational>) -> Result<Self> {
        Self::new(self.a.clone(), mu)
    }

    pub fn scaled(&self, s: &Rational) -> Result<Self> {
        Self::new(self.a.iter().map(|v| v * s).collect(), self.mu.iter().map(|v| v * s).collect())
    }
}

/// `μ ↦ t(μ) = c·a_0/(a_0 − μ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CausticMap {
    pub a0: Rational,
    pub c: Rational,
}

impl CausticMap {
    pub fn t(&self, mu: &Rational) -> Result<Rational> {
        let den = &self.a0 - mu;
        if den.is_zero() {
            return Err(Error::InvalidParameters("μ = a_0 has no image".into()));
        }
        Ok(&self.c * &self.a0 / den)
    }

    pub fn t_f64(&self, mu: f64) -> f64 {
        let a0 = crate::numeric::to_f64(&self.a0);
        crate::numeric::to_f64(&self.c) * a0 / (a0 - mu)
    }

    /// Inverse map `t ↦ a_0 (t − c)/t`.
    pub fn mu(&self, t: &Rational) -> Result<Rational> {
        if t.is_zero() {
            return Err(Error::InvalidParameters("t = 0 has no preimage".into()));
        }
        Ok(&self.a0 * (t - &self.c) / t)
    }

    pub fn mu_f64(&self, t: f64) -> f64 {
        crate::numeric::to_f64(&self.a0) * (t - crate::numeric::to_f64(&self.c)) / t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KleinImage {
    pub family: ConfocalFamily,
    pub boundary: BoundaryQuadric,
    pub caustic_map: CausticMap,
    /// Images `t(μ_j)` of the caustic parameters.
    pub caustics: Vec<Rational>,
}

/// Beltrami–Klein image of the Minkowski ellipsoid with `x_i = α_i ξ_i/ξ_0`,
/// `α_i² = b_i = c·a_0/(a_0 − a_i)`. Confocality of every image quadric is
/// verified by exact substitution.
pub fn minkowski_to_klein(e: &MinkowskiEllipsoid, c: &Rational) -> Result<KleinImage> {
    if !c.is_positive() {
        return Err(Error::InvalidParameters("boundary shift c must be positive".into()));
    }
    let a0 = &e.a[0];
    let b: Vec<Rational> = e.a[1..].iter().map(|ai| c * a0 / (a0 - ai)).collect();
    let strict_a = e.a[1..].windows(2).all(|w| w[0] > w[1]);
    let family = if strict_a {
        ConfocalFamily::new(b.clone()).map_err(|_| {
            Error::OrderingViolated("image parameters are not strictly ordered".into())
        })?
    } else {
        ConfocalFamily::symmetric(b.clone())?
    };
    let map = CausticMap { a0: a0.clone(), c: c.clone() };
    let boundary = BoundaryQuadric::new(family.clone(), c.clone())?;
    // Quadric (4) with parameter μ: ξ_0²/(a_0 − μ) − Σ ξ_i²/(a_i − μ) = 0. In x
    // it reads Σ x_i² (a_0 − μ)/(b_i (a_i − μ)) = 1, which is confocal with
    // shift t iff (a_0 − μ)(b_i − t) = b_i (a_i − μ).
    let check = |mu: &Rational, t: &Rational| {
        b.iter().zip(&e.a[1..]).all(|(bi, ai)| (a0 - mu) * (bi - t) == bi * (ai - mu))
    };
    if !check(&Rational::zero(), c) {
        return Err(Error::OrderingViolated("boundary image is not confocal".into()));
    }
    let mut caustics = Vec::with_capacity(e.mu.len());
    for mu in &e.mu {
        let t = map.t(mu)?;
        if !check(mu, &t) {
            return Err(Error::OrderingViolated(format!("caustic μ = {} is not mapped confocally", fmt_rational(mu))));
        }
        caustics.push(t);
    }
    Ok(KleinImage { family, boundary, caustic_map: map, caustics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{int, rat};

    #[test]
    fn example_421() {
        let e = MinkowskiEllipsoid::new(vec![int(4), int(2), int(1)], vec![rat(3, 2)]).unwrap();
        let k = minkowski_to_klein(&e, &int(1)).unwrap();
        assert_eq!(k.family.b(), &[int(2), rat(4, 3)]);
        let shifted: Vec<_> = k.family.b().iter().map(|b| b - k.boundary.c()).collect();
        assert_eq!(shifted, vec![int(1), rat(1, 3)]);
        assert_eq!(k.caustic_map.t(&int(0)).unwrap(), int(1));
        assert_eq!(k.caustics, vec![rat(8, 5)]);
        assert_eq!(k.caustic_map.mu(&rat(8, 5)).unwrap(), rat(3, 2));
    }

    #[test]
    fn homothety_in_c() {
        let e = MinkowskiEllipsoid::new(vec![int(4), int(2), int(1)], vec![rat(1, 2)]).unwrap();
        let k1 = minkowski_to_klein(&e, &int(1)).unwrap();
        let k2 = minkowski_to_klein(&e, &int(2)).unwrap();
        for (b1, b2) in k1.family.b().iter().zip(k2.family.b()) {
            assert_eq!(b1 * int(2), *b2);
        }
        assert_eq!(&k1.caustics[0] * int(2), k2.caustics[0]);
    }

    #[test]
    fn validation() {
        assert!(MinkowskiEllipsoid::new(vec![int(2), int(2), int(1)], vec![int(1)]).is_err());
        assert_eq!(
            MinkowskiEllipsoid::new(vec![int(4), int(2), int(1)], vec![int(0)]),
            Err(Error::ZeroParameter)
        );
        let sym = MinkowskiEllipsoid::new(vec![int(4), int(2), int(2), int(1)], vec![int(1), int(3)]).unwrap();
        let k = minkowski_to_klein(&sym, &int(1)).unwrap();
        assert!(!k.family.is_strict());
    }
}
