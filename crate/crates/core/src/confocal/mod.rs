//! Confocal quadric families, elliptic coordinates, caustics of lines, the
//! Beltrami–Klein metric and the map from the Minkowski hyperboloid model.

mod caustics;
mod document;
mod elliptic;
mod klein;
mod metric;

pub use caustics::{caustic_polynomial, cleared_discriminant, line_caustics, line_caustics_exact};
pub use document::ParameterDocument;
pub use elliptic::{elliptic_jacobian, from_elliptic, to_elliptic};
pub use klein::{minkowski_to_klein, CausticMap, KleinImage, MinkowskiEllipsoid};
pub use metric::{hyperbolic_inverse_metric, hyperbolic_metric_at, model_defect};

use nalgebra::{DMatrix, DVector};
use num_traits::Signed;

use crate::error::{Error, Result};
use crate::numeric::{fmt_rational, to_f64, Rational};

/// Relative tolerance for treating two float parameters as equal.
pub const FLOAT_TIE_TOLERANCE: f64 = 1e-12;

/// Confocal family `Σ x_i²/(b_i − t) = 1`; `t = 0` is the model ellipsoid Λ.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfocalFamily {
    b: Vec<Rational>,
    bf: Vec<f64>,
    strict: bool,
}

impl ConfocalFamily {
    /// Strict family: `b_1 > … > b_d > 0`, `d ≥ 2`.
    pub fn new(b: Vec<Rational>) -> Result<Self> {
        let fam = Self::symmetric(b)?;
        if !fam.strict {
            return Err(Error::NonStrictFamily(fam.describe()));
        }
        Ok(fam)
    }

    /// Relaxed family permitting equal parameters; usable for simulation but
    /// not for elliptic coordinates.
    pub fn symmetric(b: Vec<Rational>) -> Result<Self> {
        if b.len() < 2 {
            return Err(Error::InvalidParameters("dimension must be at least 2".into()));
        }
        if b.iter().any(|v| !v.is_positive()) || b.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::NonStrictFamily(
                b.iter().map(fmt_rational).collect::<Vec<_>>().join(", "),
            ));
        }
        let strict = b.windows(2).all(|w| w[0] > w[1]);
        let bf = b.iter().map(to_f64).collect();
        Ok(ConfocalFamily { b, bf, strict })
    }

    pub fn from_f64(b: &[f64]) -> Result<Self> {
        Self::new(b.iter().map(|&v| crate::numeric::from_f64(v)).collect::<Result<_>>()?)
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn b(&self) -> &[Rational] {
        &self.b
    }

    pub fn b_f64(&self) -> &[f64] {
        &self.bf
    }

    pub fn is_strict(&self) -> bool {
        self.strict
    }

    pub fn require_strict(&self) -> Result<()> {
        if self.strict {
            Ok(())
        } else {
            Err(Error::NonStrictFamily(self.describe()))
        }
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(&self.bf))
    }

    pub fn det(&self) -> f64 {
        self.bf.iter().product()
    }

    /// `γ(λ) = Σ x_i²/(b_i − λ)`.
    pub fn gamma(&self, x: &DVector<f64>, lambda: f64) -> f64 {
        self.bf.iter().zip(x.iter()).map(|(b, xi)| xi * xi / (b - lambda)).sum()
    }

    /// `L(x) = B − x xᵀ`.
    pub fn l_tensor(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.matrix() - x * x.transpose()
    }

    fn describe(&self) -> String {
        self.b.iter().map(fmt_rational).collect::<Vec<_>>().join(", ")
    }
}

/// Billiard boundary Γ: `Σ x_i²/(b_i − c) = 1` with `0 < c < b_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryQuadric {
    family: ConfocalFamily,
    c: Rational,
    cf: f64,
}

impl BoundaryQuadric {
    pub fn new(family: ConfocalFamily, c: Rational) -> Result<Self> {
        let bd = family.b().last().expect("dimension >= 2");
        if !c.is_positive() || &c >= bd {
            return Err(Error::InvalidParameters(format!(
                "boundary shift c = {} must satisfy 0 < c < b_d = {}",
                fmt_rational(&c),
                fmt_rational(bd)
            )));
        }
        let cf = to_f64(&c);
        Ok(BoundaryQuadric { family, c, cf })
    }

    pub fn family(&self) -> &ConfocalFamily {
        &self.family
    }

    pub fn c(&self) -> &Rational {
        &self.c
    }

    pub fn c_f64(&self) -> f64 {
        self.cf
    }

    pub fn dim(&self) -> usize {
        self.family.dim()
    }

    /// Squared semi-axes `b_i − c`.
    pub fn semi_axes_sq(&self) -> Vec<f64> {
        self.family.b_f64().iter().map(|b| b - self.cf).collect()
    }

    /// `Σ x_i²/(b_i − c) − 1`: negative inside, zero on Γ.
    pub fn level(&self, x: &DVector<f64>) -> f64 {
        self.family.gamma(x, self.cf) - 1.0
    }

    /// Gradient of the level function halved: `(x_i/(b_i − c))_i`.
    pub fn conormal(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.dim(),
            x.iter().zip(self.family.b_f64()).map(|(xi, b)| xi / (b - self.cf)),
        )
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        self.level(x) <= 0.0
    }
}

/// Elliptic coordinates `b_1 > λ_1 > b_2 > … > b_d > λ_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticCoords {
    pub lambda: Vec<f64>,
}

impl EllipticCoords {
    pub fn new(lambda: Vec<f64>) -> Self {
        EllipticCoords { lambda }
    }

    /// True when the coordinates interlace strictly with the family.
    pub fn interlaces(&self, family: &ConfocalFamily) -> bool {
        let b = family.b_f64();
        self.lambda.len() == b.len()
            && self
                .lambda
                .iter()
                .enumerate()
                .all(|(j, &l)| l < b[j] && (j + 1 == b.len() || l > b[j + 1]))
    }
}

/// Caustic parameters of a line, sorted descending, with multiplicity.
#[derive(Debug, Clone, PartialEq)]
pub struct CausticSet {
    pub params: Vec<f64>,
    /// `true` where the parameter coincides with some `b_i`.
    pub degenerate: Vec<bool>,
}

impl CausticSet {
    pub fn is_degenerate(&self) -> bool {
        self.degenerate.iter().any(|&d| d)
    }

    /// Largest relative deviation between two caustic sets of equal size.
    pub fn max_deviation(&self, other: &CausticSet) -> f64 {
        self.params
            .iter()
            .zip(&other.params)
            .map(|(a, b)| (a - b).abs() / (1.0 + a.abs()))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{int, rat};

    #[test]
    fn family_validation() {
        assert!(ConfocalFamily::new(vec![int(2), int(1)]).is_ok());
        assert!(matches!(
            ConfocalFamily::new(vec![int(1), int(2)]),
            Err(Error::NonStrictFamily(_))
        ));
        assert!(matches!(
            ConfocalFamily::new(vec![int(2), int(2)]),
            Err(Error::NonStrictFamily(_))
        ));
        let sym = ConfocalFamily::symmetric(vec![int(2), int(2), int(1)]).unwrap();
        assert!(!sym.is_strict());
        assert!(ConfocalFamily::new(vec![int(2)]).is_err());
    }

    #[test]
    fn boundary_shift_range() {
        let fam = ConfocalFamily::new(vec![int(2), int(1)]).unwrap();
        assert!(BoundaryQuadric::new(fam.clone(), rat(1, 2)).is_ok());
        assert!(BoundaryQuadric::new(fam.clone(), int(1)).is_err());
        assert!(BoundaryQuadric::new(fam, int(0)).is_err());
    }
}
