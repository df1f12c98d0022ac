use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;
use nalgebra::DVector;
use rand::Rng;

use super::chords::{chord_exit, trace_chords};
use crate::confocal::{elliptic_jacobian, from_elliptic, BoundaryQuadric, EllipticCoords};
use crate::error::{Error, Result};
use crate::hierarchy::PhasePoint;

/// Uniformly random direction, radially projected onto Γ.
pub fn random_boundary_point(boundary: &BoundaryQuadric, rng: &mut impl Rng) -> DVector<f64> {
    loop {
        let u = DVector::from_fn(boundary.dim(), |_, _| rng.gen_range(-1.0..1.0));
        if u.norm() > 1e-3 {
            return project(boundary, &u);
        }
    }
}

fn project(boundary: &BoundaryQuadric, u: &DVector<f64>) -> DVector<f64> {
    u / boundary.family().gamma(u, boundary.c_f64()).sqrt()
}

/// Unit launch from a random point of Γ along a line tangent to the confocal
/// quadrics with parameters `caustics` (with multiplicity). In elliptic
/// coordinates such a line satisfies
/// `λ̇_j² = 4 |v|² ∏_k (t_k − λ_j) ∏_i (b_i − λ_j) / ∏_{l≠j} (λ_l − λ_j)²`;
/// a double parameter pins the coordinate of its interval.
pub fn tangent_launch(boundary: &BoundaryQuadric, caustics: &[f64], rng: &mut impl Rng) -> Result<PhasePoint> {
    let family = boundary.family();
    family.require_strict()?;
    let b = family.b_f64();
    let d = b.len();
    if caustics.len() != d - 1 {
        return Err(Error::InvalidParameters(format!("expected {} caustic parameters", d - 1)));
    }
    let c = boundary.c_f64();
    let mut pinned: Vec<Option<f64>> = vec![None; d];
    for (i, &t) in caustics.iter().enumerate() {
        if caustics[i + 1..].iter().any(|&s| crate::numeric::nearly_equal(s, t, 1e-12)) {
            if let Some(j) = (0..d - 1).find(|&j| t < b[j] && t > b[j + 1]) {
                pinned[j] = Some(t);
            }
        }
    }
    for _ in 0..100_000 {
        let mut lambda = vec![c; d];
        for j in 0..d - 1 {
            lambda[j] = pinned[j].unwrap_or_else(|| {
                let w = b[j] - b[j + 1];
                rng.gen_range(b[j + 1] + 1e-3 * w..b[j] - 1e-3 * w)
            });
        }
        let mut rates = vec![0.0; d];
        let mut ok = true;
        for j in 0..d {
            if pinned[j].is_some() {
                continue;
            }
            let l = lambda[j];
            let num: f64 = caustics.iter().map(|t| t - l).product::<f64>() * b.iter().map(|bi| bi - l).product::<f64>();
            let den: f64 = (0..d).filter(|&k| k != j).map(|k| (lambda[k] - l).powi(2)).product();
            let rhs = 4.0 * num / den;
            if !(rhs > 1e-12) {
                ok = false;
                break;
            }
            let sign = if j == d - 1 || rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            rates[j] = sign * rhs.sqrt();
        }
        if !ok {
            continue;
        }
        let coords = EllipticCoords::new(lambda);
        let signs: Vec<bool> = (0..d).map(|_| rng.gen_bool(0.5)).collect();
        let x = from_elliptic(family, &coords, &signs)?;
        let v = elliptic_jacobian(family, &x, &coords) * DVector::from_vec(rates);
        let v = &v / v.norm();
        return Ok(PhasePoint::new(x, v));
    }
    Err(Error::InvalidParameters("no tangent line found for these caustic parameters".into()))
}

/// A chord normal to Γ at both ends, i.e. a period-2 orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleNormal {
    pub a: DVector<f64>,
    pub b: DVector<f64>,
    /// `1 − cos²` of the angle between the chord and the far normal.
    pub defect: f64,
    /// Angle between the chord and the nearest coordinate axis.
    pub axis_deviation: f64,
    pub closure_residual: f64,
}

struct NormalDefect<'a> {
    boundary: &'a BoundaryQuadric,
}

impl NormalDefect<'_> {
    fn chord(&self, u: &[f64]) -> (DVector<f64>, DVector<f64>, f64) {
        let x = project(self.boundary, &DVector::from_column_slice(u));
        let n = self.boundary.conormal(&x).normalize();
        let t = chord_exit(self.boundary, &x, &(-&n));
        let y = &x - &n * t;
        let ny = self.boundary.conormal(&y).normalize();
        let cos = ny.dot(&n);
        (x, y, 1.0 - cos * cos)
    }
}

impl CostFunction for NormalDefect<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, u: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        if u.iter().all(|&v| v == 0.0) {
            return Ok(1.0);
        }
        Ok(self.chord(u).2)
    }
}

/// Randomised Nelder–Mead search for double normals of Γ from `starts` seeds.
/// Returns the distinct chords whose defect falls below `1e-14`.
pub fn find_double_normals(boundary: &BoundaryQuadric, starts: usize, rng: &mut impl Rng) -> Result<Vec<DoubleNormal>> {
    let d = boundary.dim();
    let mut found: Vec<DoubleNormal> = Vec::new();
    for _ in 0..starts {
        let u0: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut simplex = vec![u0.clone()];
        for i in 0..d {
            let mut v = u0.clone();
            v[i] += 0.2;
            simplex.push(v);
        }
        let solver = NelderMead::new(simplex)
            .with_sd_tolerance(1e-18)
            .map_err(|e| Error::Integration(e.to_string()))?;
        let problem = NormalDefect { boundary };
        let res = Executor::new(problem, solver)
            .configure(|s| s.max_iters(4000))
            .run()
            .map_err(|e| Error::Integration(e.to_string()))?;
        let Some(best) = res.state().get_best_param().cloned() else { continue };
        let (a, b, defect) = NormalDefect { boundary }.chord(&best);
        if defect >= 1e-14 {
            continue;
        }
        if found.iter().any(|f| ((&f.a - &a).norm() < 1e-5 && (&f.b - &b).norm() < 1e-5) || ((&f.a - &b).norm() < 1e-5 && (&f.b - &a).norm() < 1e-5)) {
            continue;
        }
        let dir = (&b - &a).normalize();
        let axis_deviation = dir.iter().fold(0.0f64, |m, v| m.max(v.abs())).min(1.0).acos();
        let tr = trace_chords(boundary, &a, &(&b - &a), 2)?;
        found.push(DoubleNormal {
            a,
            b,
            defect,
            axis_deviation,
            closure_residual: tr.closure_residual(2).unwrap_or(f64::INFINITY),
        });
    }
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::confocal::{line_caustics, ConfocalFamily};
    use crate::numeric::{int, rat};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn launches_are_tangent() {
        let fam = ConfocalFamily::new(vec![int(5), int(3), int(1)]).unwrap();
        let bd = BoundaryQuadric::new(fam.clone(), rat(1, 2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for caustics in [[3.5, 0.8], [2.0, 0.7], [4.0, 2.5], [2.0, 2.0]] {
            for _ in 0..20 {
                let s = tangent_launch(&bd, &caustics, &mut rng).unwrap();
                assert!(bd.level(&s.x).abs() < 1e-12);
                assert!(bd.level(&(&s.x + &s.p * 1e-6)) < 0.0);
                let cs = line_caustics(&fam, &s.x, &s.p).unwrap();
                for (a, b) in cs.params.iter().zip(&caustics) {
                    assert!((a - b).abs() < 1e-7, "{:?} vs {:?}", cs.params, caustics);
                }
            }
        }
    }

    #[test]
    fn double_normals_are_axes() {
        let fam = ConfocalFamily::new(vec![int(5), int(3), int(1)]).unwrap();
        let bd = BoundaryQuadric::new(fam, rat(1, 2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let found = find_double_normals(&bd, 12, &mut rng).unwrap();
        assert!(!found.is_empty());
        for f in found {
            assert!(f.axis_deviation < 1e-6);
            assert!(f.closure_residual < 1e-6);
        }
    }
}
