use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_traits::Zero;

use super::laurent::LaurentPolynomial;
use super::Potential;
use crate::confocal::ConfocalFamily;
use crate::error::{Error, Result};
use crate::hierarchy::{char_tensors, HierarchyContext, IntegralJ, PhaseFunction, PhasePoint};

/// `S_i(x) ∇V(x)` as Laurent polynomials, with `S_i` from the exact adjugate
/// recursion on `L = B − x ⊗ x`.
pub fn symbolic_field(family: &ConfocalFamily, v: &LaurentPolynomial, i: usize) -> Vec<LaurentPolynomial> {
    let d = family.dim();
    let x: Vec<LaurentPolynomial> = (0..d).map(LaurentPolynomial::variable).collect();
    let l: Vec<Vec<LaurentPolynomial>> = (0..d)
        .map(|r| {
            (0..d)
                .map(|c| {
                    let xx = &x[r] * &x[c];
                    if r == c {
                        &LaurentPolynomial::constant(family.b()[r].clone()) - &xx
                    } else {
                        -xx
                    }
                })
                .collect()
        })
        .collect();
    let s = crate::hierarchy::leverrier_generic(&l);
    let grad: Vec<LaurentPolynomial> = (0..d).map(|m| v.partial(m)).collect();
    (0..d)
        .map(|r| (0..d).fold(LaurentPolynomial::zero(), |acc, c| &acc + &(&s[i][r][c] * &grad[c])))
        .collect()
}

/// Potential of a closed Laurent 1-form, integrating one coordinate at a
/// time; `None` if the form is not exact in the Laurent class.
pub fn antiderivative(field: &[LaurentPolynomial]) -> Option<LaurentPolynomial> {
    let mut f = LaurentPolynomial::zero();
    for (m, component) in field.iter().enumerate() {
        let rest = component - &f.partial(m);
        f = &f + &rest.integrate(m)?;
    }
    field.iter().enumerate().all(|(m, c)| f.partial(m) == *c).then_some(f)
}

/// Gauss–Legendre nodes and weights on `[0, 1]` (Golub–Welsch).
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut jac = DMatrix::zeros(n, n);
    for k in 1..n {
        let beta = k as f64 / ((4 * k * k - 1) as f64).sqrt();
        jac[(k, k - 1)] = beta;
        jac[(k - 1, k)] = beta;
    }
    let eig = SymmetricEigen::new(jac);
    let mut out: Vec<(f64, f64)> = (0..n)
        .map(|k| ((eig.eigenvalues[k] + 1.0) / 2.0, eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

fn field_at(family: &ConfocalFamily, v: &dyn Potential, i: usize, x: &DVector<f64>) -> DVector<f64> {
    let (_, s) = char_tensors(&HierarchyContext::new(family.clone(), 0), x);
    &s.s[i] * v.gradient(x)
}

/// `∫ ⟨S_i ∇V, dx⟩` along the polygon through `vertices`.
pub fn line_integral(family: &ConfocalFamily, v: &dyn Potential, i: usize, vertices: &[DVector<f64>]) -> f64 {
    let rule = gauss_legendre(20);
    let pieces = 4;
    let mut total = 0.0;
    for w in vertices.windows(2) {
        let delta = &w[1] - &w[0];
        for q in 0..pieces {
            for &(t, weight) in &rule {
                let s = (q as f64 + t) / pieces as f64;
                let x = &w[0] + &delta * s;
                total += weight / pieces as f64 * field_at(family, v, i, &x).dot(&delta);
            }
        }
    }
    total
}

/// Integral of `S_i ∇V` around the rectangle with corner `corner` and sides
/// `ha e_a`, `hb e_b`.
pub fn loop_integral(
    family: &ConfocalFamily,
    v: &dyn Potential,
    i: usize,
    corner: &DVector<f64>,
    (a, b): (usize, usize),
    (ha, hb): (f64, f64),
) -> f64 {
    let mut p1 = corner.clone();
    p1[a] += ha;
    let mut p2 = p1.clone();
    p2[b] += hb;
    let mut p3 = corner.clone();
    p3[b] += hb;
    line_integral(family, v, i, &[corner.clone(), p1, p2, p3, corner.clone()])
}

/// `f_i` with `∇f_i = S_i ∇V` and `f_i(base) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompanionFunction {
    pub family: ConfocalFamily,
    pub potential: LaurentPolynomial,
    pub i: usize,
    pub base: DVector<f64>,
    /// Exact antiderivative (up to the constant fixed at `base`).
    pub symbolic: Option<LaurentPolynomial>,
    /// Largest loop integral seen in the integrability check.
    pub loop_residual: f64,
}

impl CompanionFunction {
    pub fn value(&self, x: &DVector<f64>) -> f64 {
        match &self.symbolic {
            Some(f) => f.eval(x.as_slice()) - f.eval(self.base.as_slice()),
            None => self.line_value(x),
        }
    }

    /// Value by integration along the axis-parallel path from `base`.
    pub fn line_value(&self, x: &DVector<f64>) -> f64 {
        let mut path = vec![self.base.clone()];
        for m in 0..x.len() {
            let mut next = path[path.len() - 1].clone();
            next[m] = x[m];
            path.push(next);
        }
        line_integral(&self.family, &self.potential, self.i, &path)
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        field_at(&self.family, &self.potential, self.i, x)
    }
}

/// Solves `∇f_i = S_i ∇V`. Integrability is checked by loop integrals in
/// every coordinate plane (and exactly, on the Laurent field); failure is
/// reported as `NotSeparable`. The additive constant is fixed by `f_i = 0`
/// at the origin for polynomial `V`, otherwise at a point off the
/// coordinate hyperplanes.
pub fn solve_f(ctx: &HierarchyContext, v: &LaurentPolynomial, i: usize) -> Result<CompanionFunction> {
    let family = ctx.family();
    let d = family.dim();
    if i >= d {
        return Err(Error::InvalidParameters(format!("index {i} out of range for d = {d}")));
    }
    let b = family.b_f64();
    let base = if v.is_polynomial() {
        DVector::zeros(d)
    } else {
        DVector::from_fn(d, |m, _| 0.5 * (b[m] / d as f64).sqrt())
    };
    let h = 0.2 * (b[d - 1] / d as f64).sqrt();
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for a in 0..d {
        for c in a + 1..d {
            let r = loop_integral(family, v, i, &base, (a, c), (h, 0.7 * h));
            worst = worst.max(r.abs());
            scale = scale.max(line_integral(family, v, i, &[base.clone(), {
                let mut p = base.clone();
                p[a] += h;
                p[c] += 0.7 * h;
                p
            }]).abs());
        }
    }
    let defect = worst / scale.max(1e-300);
    if defect > 1e-10 {
        return Err(Error::NotSeparable { defect });
    }
    let field = symbolic_field(family, v, i);
    for a in 0..d {
        for c in a + 1..d {
            if field[a].partial(c) != field[c].partial(a) {
                return Err(Error::NotSeparable { defect });
            }
        }
    }
    let symbolic = antiderivative(&field);
    Ok(CompanionFunction { family: family.clone(), potential: v.clone(), i, base, symbolic, loop_residual: worst })
}

/// `I_i = J_i^k + 2 f_i`, conserved by `½ g_k⁻¹(p, p) + V` and invariant
/// under the billiard reflection.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedIntegral {
    pub j: IntegralJ,
    pub f: CompanionFunction,
}

impl PerturbedIntegral {
    pub fn new(ctx: &HierarchyContext, v: &LaurentPolynomial, i: usize) -> Result<Self> {
        Ok(PerturbedIntegral { j: IntegralJ::new(ctx.clone(), i), f: solve_f(ctx, v, i)? })
    }
}

impl PhaseFunction for PerturbedIntegral {
    fn value(&self, s: &PhasePoint) -> Result<f64> {
        Ok(self.j.value(s)? + 2.0 * self.f.value(&s.x))
    }

    fn grad_x(&self, s: &PhasePoint) -> Result<DVector<f64>> {
        Ok(self.j.grad_x(s)? + self.f.gradient(&s.x) * 2.0)
    }

    fn grad_p(&self, s: &PhasePoint) -> Result<DVector<f64>> {
        self.j.grad_p(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::poisson_bracket;
    use crate::numeric::{int, rat};
    use crate::potentials::{basis_potential, BasisSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ctx2() -> HierarchyContext {
        HierarchyContext::new(ConfocalFamily::new(vec![int(2), int(1)]).unwrap(), 0)
    }

    #[test]
    fn last_index_recovers_the_potential() {
        let c = ctx2();
        for spec in [BasisSpec::v(1), BasisSpec::v(3), BasisSpec::w(2, 0)] {
            let v = basis_potential(spec, c.family()).unwrap();
            let f = solve_f(&c, &v, 1).unwrap();
            let sym = f.symbolic.clone().unwrap();
            assert_eq!(&sym - &v, LaurentPolynomial::constant(sym.constant_term() - v.constant_term()));
            let x = DVector::from_vec(vec![0.4, -0.3]);
            assert!((f.value(&x) - f.line_value(&x)).abs() < 1e-11);
        }
    }

    #[test]
    fn jacobi_field_is_closed_on_random_rectangles() {
        let c = ctx2();
        let v = basis_potential(BasisSpec::v(1), c.family()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let corner = DVector::from_fn(2, |_, _| rng.gen_range(-1.0..1.0));
            let r = loop_integral(c.family(), &v, 0, &corner, (0, 1), (rng.gen_range(0.1..1.0), rng.gen_range(0.1..1.0)));
            assert!(r.abs() < 1e-12);
        }
    }

    #[test]
    fn linear_potential_is_rejected() {
        let v = LaurentPolynomial::variable(0);
        assert!(matches!(solve_f(&ctx2(), &v, 0), Err(Error::NotSeparable { .. })));
    }

    #[test]
    fn perturbed_integrals_commute() {
        let fam = ConfocalFamily::new(vec![int(5), int(3), rat(3, 2)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for spec in [BasisSpec::v(2), BasisSpec::w(2, 1)] {
            let v = basis_potential(spec, &fam).unwrap();
            for k in [0, 1] {
                let ctx = HierarchyContext::new(fam.clone(), k);
                let is: Vec<PerturbedIntegral> = (0..3).map(|i| PerturbedIntegral::new(&ctx, &v, i).unwrap()).collect();
                for _ in 0..20 {
                    let x = crate::hierarchy::random_interior_point(&fam, 0.3, &mut rng);
                    let p = DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0));
                    let s = PhasePoint::new(x, p);
                    for a in 0..3 {
                        for b in a + 1..3 {
                            let br = poisson_bracket(&is[a], &is[b], &s).unwrap();
                            let size = |f: &PerturbedIntegral| f.grad_x(&s).unwrap().norm() + f.grad_p(&s).unwrap().norm();
                            let rel = br.abs() / (size(&is[a]) * size(&is[b]));
                            assert!(rel < 1e-12, "{spec} k={k} {br} {rel}");
                        }
                    }
                }
            }
        }
    }
}
