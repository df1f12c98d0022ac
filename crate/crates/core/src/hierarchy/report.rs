use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::integrals::{independence_measure, poisson_bracket, IntegralJ, PhaseFunction, PhasePoint};
use super::metric::{Branch, HierarchyMetric};
use super::tensors::closed_form_deviation;
use super::HierarchyContext;
use crate::confocal::{model_defect, BoundaryQuadric, ConfocalFamily};
use crate::dynamics::{geodesic_flow, reflect, GRAZING_THRESHOLD};
use crate::error::{Error, Result};
use crate::numeric::{fmt_rational, int};

/// Residuals of the hierarchy checks for one `(d, k)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HierarchyRow {
    pub d: usize,
    pub k: i32,
    pub b: Vec<String>,
    pub seed: u64,
    pub samples: usize,
    /// Largest `|{J_i^k, J_j^k}|` over the sampled states.
    pub involution: f64,
    /// Largest change of any `J_i^k` along the sampled geodesics, relative to
    /// the largest initial `|J_i^k|`, per unit time.
    pub conservation_drift: f64,
    /// Largest `|J_i^k(x, p₊) − J_i^k(x, p₋)|` at sampled boundary states.
    pub reflection_residual: f64,
    /// Smallest singular value of the normalised gradient matrix.
    pub independence: f64,
    /// Largest deviation of the closed-form adjugate from the recursion.
    pub closed_form_deviation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckSizes {
    pub states: usize,
    pub boundary_states: usize,
    pub geodesics: usize,
    pub t_end: f64,
    pub tol: f64,
}

impl Default for CheckSizes {
    fn default() -> Self {
        CheckSizes { states: 1000, boundary_states: 1000, geodesics: 4, t_end: 1.0, tol: 1e-9 }
    }
}

/// Point of Λ with `f(x) ≥ margin`.
pub fn random_interior_point(family: &ConfocalFamily, margin: f64, rng: &mut impl Rng) -> DVector<f64> {
    let b = family.b_f64();
    loop {
        let x = DVector::from_fn(b.len(), |i, _| rng.gen_range(-1.0..1.0) * b[i].sqrt());
        if model_defect(family, &x) >= margin {
            return x;
        }
    }
}

fn random_momentum(d: usize, rng: &mut impl Rng) -> DVector<f64> {
    DVector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0))
}

/// Involution, conservation, reflection invariance and independence of the
/// integrals `J_0^k, …, J_{d−1}^k` on random samples drawn from `seed`.
pub fn hierarchy_check(family: &ConfocalFamily, k: i32, sizes: &CheckSizes, seed: u64) -> Result<HierarchyRow> {
    family.require_strict()?;
    let d = family.dim();
    let ctx = HierarchyContext::new(family.clone(), k);
    let js: Vec<IntegralJ> = (0..d).map(|i| IntegralJ::new(ctx.clone(), i)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut involution: f64 = 0.0;
    let mut independence = f64::INFINITY;
    let mut closed_form: f64 = 0.0;
    for _ in 0..sizes.states {
        let s = PhasePoint::new(random_interior_point(family, 0.2, &mut rng), random_momentum(d, &mut rng));
        for i in 0..d {
            for j in i + 1..d {
                involution = involution.max(poisson_bracket(&js[i], &js[j], &s)?.abs());
            }
        }
        independence = independence.min(independence_measure(&ctx, &s)?);
        closed_form = closed_form.max(closed_form_deviation(&ctx, &s.x));
    }

    let metric = HierarchyMetric::new(ctx.clone(), Branch::Euclidean);
    let mut drift: f64 = 0.0;
    for _ in 0..sizes.geodesics {
        let x = random_interior_point(family, 0.5, &mut rng);
        let p = random_momentum(d, &mut rng);
        let p = &p * (0.1 / p.norm());
        let start = PhasePoint::new(x, p);
        let initial: Vec<f64> = js.iter().map(|j| j.value(&start)).collect::<Result<_>>()?;
        let scale = initial.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let path = geodesic_flow(&metric, &start, sizes.t_end, sizes.tol)?;
        for state in &path.states {
            for (j, v0) in js.iter().zip(&initial) {
                drift = drift.max((j.value(state)? - v0).abs() / scale / sizes.t_end);
            }
        }
    }

    let b_d = family.b().last().expect("d ≥ 2").clone();
    let boundary = BoundaryQuadric::new(family.clone(), b_d / int(2))?;
    let mut reflection: f64 = 0.0;
    let mut done = 0;
    while done < sizes.boundary_states {
        let x = crate::dynamics::random_boundary_point(&boundary, &mut rng);
        let p = random_momentum(d, &mut rng);
        let p_out = match reflect(&boundary, &metric, &x, &p) {
            Ok(q) => q,
            Err(Error::TangentialImpact { transversality }) if transversality < GRAZING_THRESHOLD => continue,
            Err(e) => return Err(e),
        };
        let before = PhasePoint::new(x.clone(), p);
        let after = PhasePoint::new(x, p_out);
        for j in &js {
            reflection = reflection.max((j.value(&after)? - j.value(&before)?).abs());
        }
        done += 1;
    }

    Ok(HierarchyRow {
        d,
        k,
        b: family.b().iter().map(fmt_rational).collect(),
        seed,
        samples: sizes.states,
        involution,
        conservation_drift: drift,
        reflection_residual: reflection,
        independence,
        closed_form_deviation: closed_form,
    })
}

/// Fixed-width rendering of report rows.
pub fn render_rows(rows: &[HierarchyRow]) -> String {
    let mut out = String::from("d,k,involution,conservation_drift,reflection_residual,independence,closed_form_deviation\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.3e},{:.3e},{:.3e},{:.3e},{:.3e}\n",
            r.d, r.k, r.involution, r.conservation_drift, r.reflection_residual, r.independence, r.closed_form_deviation
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let fam = ConfocalFamily::new(vec![int(5), int(3), int(1)]).unwrap();
        let sizes = CheckSizes { states: 50, boundary_states: 50, geodesics: 1, t_end: 1.0, tol: 1e-9 };
        for k in [-1, 0, 1, 2] {
            let row = hierarchy_check(&fam, k, &sizes, 7).unwrap();
            assert!(row.involution < 1e-8, "{row:?}");
            assert!(row.conservation_drift < 1e-6, "{row:?}");
            assert!(row.reflection_residual < 1e-10, "{row:?}");
            assert!(row.independence > 1e-8, "{row:?}");
            assert!(row.closed_form_deviation < 1e-10, "{row:?}");
        }
        let again = hierarchy_check(&fam, 1, &sizes, 7).unwrap();
        assert_eq!(again, hierarchy_check(&fam, 1, &sizes, 7).unwrap());
    }
}
