use nalgebra::{DMatrix, DVector};

use super::ConfocalFamily;
use crate::error::{Error, Result};

/// `f(x) = 1 − Σ x_i²/b_i`; positive strictly inside Λ.
pub fn model_defect(family: &ConfocalFamily, x: &DVector<f64>) -> f64 {
    1.0 - family.gamma(x, 0.0)
}

/// Hyperbolic metric `Π = (f B⁻¹ + B⁻¹x ⊗ B⁻¹x)/(det B · f²)` inside Λ.
pub fn hyperbolic_metric_at(family: &ConfocalFamily, x: &DVector<f64>) -> Result<DMatrix<f64>> {
    let f = model_defect(family, x);
    if f <= 0.0 {
        return Err(Error::OutsideModel { f });
    }
    let b = family.b_f64();
    let y = DVector::from_iterator(x.len(), x.iter().zip(b).map(|(xi, bi)| xi / bi));
    let binv = DMatrix::from_diagonal(&DVector::from_iterator(b.len(), b.iter().map(|bi| 1.0 / bi)));
    Ok((binv * f + &y * y.transpose()) / (family.det() * f * f))
}

/// `Π⁻¹ = f · det B · (B − x ⊗ x)`.
pub fn hyperbolic_inverse_metric(family: &ConfocalFamily, x: &DVector<f64>) -> Result<DMatrix<f64>> {
    let f = model_defect(family, x);
    if f <= 0.0 {
        return Err(Error::OutsideModel { f });
    }
    Ok(family.l_tensor(x) * (f * family.det()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::int;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).abs().max() / b.abs().max()
    }

    #[test]
    fn centre_value() {
        let fam = ConfocalFamily::new(vec![int(2), int(1)]).unwrap();
        let p = hyperbolic_metric_at(&fam, &DVector::zeros(2)).unwrap();
        assert_eq!(p, DMatrix::from_diagonal(&DVector::from_vec(vec![0.25, 0.5])));
    }

    #[test]
    fn l_identity_and_symmetry() {
        let fam = ConfocalFamily::new(vec![int(3), int(2), int(1)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut n = 0;
        while n < 1000 {
            let x = DVector::from_fn(3, |_, _| rng.gen_range(-1.7..1.7));
            if model_defect(&fam, &x) <= 1e-3 {
                continue;
            }
            n += 1;
            let p = hyperbolic_metric_at(&fam, &x).unwrap();
            assert!(p.clone().cholesky().is_some());
            let lhs = p.clone().try_inverse().unwrap() * p.determinant().powf(1.0 / 4.0);
            assert!(rel_err(&lhs, &fam.l_tensor(&x)) < 1e-10);
            assert_eq!(p, hyperbolic_metric_at(&fam, &(-&x)).unwrap());
        }
    }

    #[test]
    fn example_point() {
        let fam = ConfocalFamily::new(vec![int(2), int(1)]).unwrap();
        let x = DVector::from_vec(vec![1.0, 0.5]);
        assert_eq!(model_defect(&fam, &x), 0.25);
        let p = hyperbolic_metric_at(&fam, &x).unwrap();
        assert!(p.clone().cholesky().is_some());
        let inv = hyperbolic_inverse_metric(&fam, &x).unwrap();
        assert!(rel_err(&(p * inv), &DMatrix::identity(2, 2)) < 1e-14);
        assert!(matches!(
            hyperbolic_metric_at(&fam, &DVector::from_vec(vec![2.0, 0.0])),
            Err(Error::OutsideModel { .. })
        ));
    }
}
