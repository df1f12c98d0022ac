use nalgebra::DVector;

use super::reflect::reflect;
use super::trajectory::{Bounce, Trajectory};
use crate::confocal::{line_caustics, BoundaryQuadric};
use crate::error::{Error, Result};
use crate::hierarchy::{HierarchyMetric, Metric, PhasePoint};

/// Forward parameter `t > 0` of the exit point of `x + t v` through Γ, using
/// the cancellation-free root of `A t² + 2B t + C = 0`.
pub fn chord_exit(boundary: &BoundaryQuadric, x: &DVector<f64>, v: &DVector<f64>) -> f64 {
    let s = boundary.semi_axes_sq();
    let (mut a, mut b, mut c) = (0.0, 0.0, -1.0);
    for i in 0..x.len() {
        a += v[i] * v[i] / s[i];
        b += x[i] * v[i] / s[i];
        c += x[i] * x[i] / s[i];
    }
    let disc = (b * b - a * c).max(0.0).sqrt();
    if b > 0.0 {
        -c / (b + disc)
    } else {
        (disc - b) / a
    }
}

/// Euclidean chord billiard: `n_bounces` straight segments between successive
/// boundary points, reflected by the billiard law.
pub fn trace_chords(boundary: &BoundaryQuadric, x0: &DVector<f64>, v0: &DVector<f64>, n_bounces: usize) -> Result<Trajectory> {
    let metric = HierarchyMetric::euclidean(boundary.family().clone());
    let mut t = trace_chords_in(boundary, &metric, x0, v0, n_bounces)?;
    t.metric_tag = "euclidean_chords".into();
    Ok(t)
}

/// Chord billiard reflected with the law of `metric`. Meant for metrics whose
/// geodesics are straight lines (`g_0` and its Klein-model partner); momenta
/// are stored as unit velocities.
pub fn trace_chords_in(
    boundary: &BoundaryQuadric,
    metric: &dyn Metric,
    x0: &DVector<f64>,
    v0: &DVector<f64>,
    n_bounces: usize,
) -> Result<Trajectory> {
    if v0.iter().all(|&c| c == 0.0) {
        return Err(Error::ZeroDirection);
    }
    if boundary.level(x0) > super::reflect::BOUNDARY_TOLERANCE {
        return Err(Error::InvalidParameters("launch point lies outside the boundary".into()));
    }
    let family = boundary.family();
    let mut x = x0.clone();
    let mut v = v0.clone();
    let mut bounces = Vec::with_capacity(n_bounces);
    let mut segments = Vec::with_capacity(n_bounces + 1);
    segments.push(line_caustics(family, &x, &v)?);
    for _ in 0..n_bounces {
        let t = chord_exit(boundary, &x, &v);
        x += &v * t;
        let out = if metric.is_flat() {
            reflect(boundary, metric, &x, &v)?
        } else {
            let p = metric.matrix(&x)? * &v;
            let q = reflect(boundary, metric, &x, &p)?;
            metric.cometric(&x)? * q
        };
        let out = &out * (v.norm() / out.norm());
        bounces.push(Bounce { x: x.clone(), p_in: v.clone(), p_out: out.clone() });
        v = out;
        segments.push(line_caustics(family, &x, &v)?);
    }
    Ok(Trajectory {
        start: PhasePoint::new(x0.clone(), v0.clone()),
        bounces,
        segments,
        metric_tag: format!("{}_chords", metric.tag()),
        energy: 0.5 * v0.norm_squared(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::confocal::ConfocalFamily;
    use crate::dynamics::closure_check;
    use crate::numeric::int;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn axis_orbit() {
        // x²/4 + y² = 1 as the member c = 1 of the family b = (5, 2).
        let fam = ConfocalFamily::new(vec![int(5), int(2)]).unwrap();
        let bd = BoundaryQuadric::new(fam, int(1)).unwrap();
        let x0 = DVector::from_vec(vec![-2.0, 0.0]);
        let tr = trace_chords(&bd, &x0, &DVector::from_vec(vec![1.0, 0.0]), 3).unwrap();
        assert_eq!(tr.bounces[0].x, DVector::from_vec(vec![2.0, 0.0]));
        assert!(closure_check(&tr, 2, 1e-9));
        assert!(!closure_check(&tr, 3, 1e-9));
        assert_eq!(tr.segments[0].params, vec![2.0]);
        assert!(tr.segments[0].is_degenerate());
    }

    #[test]
    fn chasles_long_orbit() {
        let fam = ConfocalFamily::new(vec![int(5), int(3), int(1)]).unwrap();
        let bd = BoundaryQuadric::new(fam, crate::numeric::rat(1, 2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x0 = DVector::from_vec(vec![0.3, -0.2, 0.1]);
        let v0 = DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0));
        let tr = trace_chords(&bd, &x0, &v0, 200).unwrap();
        assert!(tr.caustic_drift() < 1e-9);
        for b in &tr.bounces {
            assert!(bd.level(&b.x).abs() < 1e-10);
            assert!((b.p_out.norm() - v0.norm()).abs() < 1e-12);
        }
        let table = tr.table();
        assert_eq!(table.lines().count(), 202);
        assert!(table.starts_with("index,x1,x2,x3,p1,p2,p3,mu1,mu2\n"));
    }
}
