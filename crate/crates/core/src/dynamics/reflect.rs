use nalgebra::DVector;

use crate::confocal::{elliptic_jacobian, to_elliptic, BoundaryQuadric};
use crate::error::{Error, Result};
use crate::hierarchy::Metric;

/// Grazing threshold on the normalised transversality `|g⁻¹(p, n)|/(|p| |n|)`.
pub const GRAZING_THRESHOLD: f64 = 1e-12;
/// Admissible boundary defect of a bounce point.
pub const BOUNDARY_TOLERANCE: f64 = 1e-10;

fn on_boundary(boundary: &BoundaryQuadric, x: &DVector<f64>) -> Result<()> {
    let residual = boundary.level(x);
    if residual.abs() > BOUNDARY_TOLERANCE {
        return Err(Error::NotOnBoundary { residual });
    }
    Ok(())
}

/// Normalised transversality of the covector `p` at the boundary point `x`.
pub fn transversality(boundary: &BoundaryQuadric, metric: &dyn Metric, x: &DVector<f64>, p: &DVector<f64>) -> Result<f64> {
    let n = boundary.conormal(x);
    let g = metric.cometric(x)?;
    let gn = &g * &n;
    Ok(p.dot(&gn).abs() / (p.dot(&(&g * p)) * n.dot(&gn)).sqrt())
}

/// Billiard law for covectors: `p₊ = p₋ − 2 g⁻¹(p₋, n)/g⁻¹(n, n) · n` with `n`
/// the conormal of Γ at `x`.
pub fn reflect(boundary: &BoundaryQuadric, metric: &dyn Metric, x: &DVector<f64>, p_minus: &DVector<f64>) -> Result<DVector<f64>> {
    on_boundary(boundary, x)?;
    let n = boundary.conormal(x);
    let g = metric.cometric(x)?;
    let gn = &g * &n;
    let a = p_minus.dot(&gn);
    let nn = n.dot(&gn);
    let t = a.abs() / (p_minus.dot(&(&g * p_minus)) * nn).sqrt();
    if !(t >= GRAZING_THRESHOLD) {
        return Err(Error::TangentialImpact { transversality: t });
    }
    Ok(p_minus - n * (2.0 * a / nn))
}

/// The same law in elliptic coordinates: the covector component `p_{λ_d}`
/// changes sign and the others are kept. Independent of the metric.
pub fn reflect_elliptic(boundary: &BoundaryQuadric, x: &DVector<f64>, p_minus: &DVector<f64>) -> Result<DVector<f64>> {
    on_boundary(boundary, x)?;
    let family = boundary.family();
    let lambda = to_elliptic(family, x)?;
    let j = elliptic_jacobian(family, x, &lambda);
    let mut pl = j.transpose() * p_minus;
    let d = pl.len();
    pl[d - 1] = -pl[d - 1];
    j.transpose().lu().solve(&pl).ok_or(Error::DegenerateChart { axis: d - 1, lambda: lambda.lambda })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::confocal::ConfocalFamily;
    use crate::hierarchy::{Branch, HierarchyContext, HierarchyMetric};
    use crate::numeric::{int, rat};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn boundary(b: &[i64]) -> BoundaryQuadric {
        let fam = ConfocalFamily::new(b.iter().map(|&v| int(v)).collect()).unwrap();
        BoundaryQuadric::new(fam, rat(1, 2)).unwrap()
    }

    fn random_boundary_point(bd: &BoundaryQuadric, rng: &mut impl Rng) -> DVector<f64> {
        let u = DVector::from_fn(bd.dim(), |_, _| rng.gen_range(-1.0..1.0));
        let s = bd.family().gamma(&u, bd.c_f64()).sqrt();
        u / s
    }

    #[test]
    fn normal_incidence_reverses() {
        let bd = boundary(&[2, 1]);
        let g = HierarchyMetric::euclidean(bd.family().clone());
        let x = DVector::from_vec(vec![1.5f64.sqrt(), 0.0]);
        let p = DVector::from_vec(vec![2.0, 0.0]);
        assert_eq!(reflect(&bd, &g, &x, &p).unwrap(), -p);
    }

    #[test]
    fn grazing_and_off_boundary() {
        let bd = boundary(&[2, 1]);
        let g = HierarchyMetric::euclidean(bd.family().clone());
        let x = DVector::from_vec(vec![1.5f64.sqrt(), 0.0]);
        let p = DVector::from_vec(vec![0.0, 1.0]);
        assert!(matches!(reflect(&bd, &g, &x, &p), Err(Error::TangentialImpact { .. })));
        let inside = DVector::from_vec(vec![0.1, 0.0]);
        assert!(matches!(reflect(&bd, &g, &inside, &p), Err(Error::NotOnBoundary { .. })));
    }

    #[test]
    fn covector_and_elliptic_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for b in [&[2i64, 1][..], &[5, 3, 1][..]] {
            let bd = boundary(b);
            for k in -1..=2 {
                for branch in [Branch::Euclidean, Branch::Hyperbolic] {
                    let g = HierarchyMetric::new(HierarchyContext::new(bd.family().clone(), k), branch);
                    for _ in 0..200 {
                        let x = random_boundary_point(&bd, &mut rng);
                        let p = DVector::from_fn(bd.dim(), |_, _| rng.gen_range(-1.0..1.0));
                        let a = reflect(&bd, &g, &x, &p).unwrap();
                        let e = reflect_elliptic(&bd, &x, &p).unwrap();
                        assert!((&a - &e).norm() < 1e-10 * p.norm());
                        let back = reflect(&bd, &g, &x, &a).unwrap();
                        assert!((&back - &p).norm() < 1e-12 * p.norm());
                        let gi = g.cometric(&x).unwrap();
                        assert!((a.dot(&(&gi * &a)) - p.dot(&(&gi * &p))).abs() < 1e-12 * p.dot(&(&gi * &p)));
                        // Tangential part (g-orthogonal to the normal) is preserved.
                        let n = bd.conormal(&x);
                        let tangent = |q: &DVector<f64>| q - &n * (q.dot(&(&gi * &n)) / n.dot(&(&gi * &n)));
                        assert!((tangent(&a) - tangent(&p)).norm() < 1e-12 * p.norm());
                    }
                }
            }
        }
    }
}
