use nalgebra::{DMatrix, DVector};

use super::HierarchyContext;
use crate::confocal::{model_defect, ConfocalFamily};
use crate::error::{Error, Result};
use crate::potentials::Potential;

/// A Riemannian metric on a domain of ℝ^d, given through its cometric.
pub trait Metric: Send + Sync {
    fn dim(&self) -> usize;

    /// `g⁻¹(x)`.
    fn cometric(&self, x: &DVector<f64>) -> Result<DMatrix<f64>>;

    /// `∂/∂x` of the kinetic energy `½ g⁻¹(x)(p, p)`.
    fn kinetic_gradient(&self, x: &DVector<f64>, p: &DVector<f64>) -> Result<DVector<f64>>;

    /// `g(x)`.
    fn matrix(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.cometric(x)?.try_inverse().ok_or(Error::SingularL)
    }

    /// True for the flat metric `δ_ij`, whose geodesics are straight lines.
    fn is_flat(&self) -> bool {
        false
    }

    fn tag(&self) -> String;

    fn kinetic(&self, x: &DVector<f64>, p: &DVector<f64>) -> Result<f64> {
        Ok(0.5 * p.dot(&(self.cometric(x)? * p)))
    }
}

/// Which member of a geodesically equivalent pair: `g_k = ⟨L^k dx, dx⟩` or
/// `ḡ_k = ⟨Π L^k dx, dx⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Euclidean,
    Hyperbolic,
}

/// `g_k` or `ḡ_k`. Both cometrics have the form `φ(x) L^m`: `φ = 1, m = −k`
/// on the Euclidean branch and `φ = f·det B, m = 1 − k` on the hyperbolic one.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyMetric {
    ctx: HierarchyContext,
    branch: Branch,
}

impl HierarchyMetric {
    pub fn new(ctx: HierarchyContext, branch: Branch) -> Self {
        HierarchyMetric { ctx, branch }
    }

    pub fn euclidean(family: ConfocalFamily) -> Self {
        Self::new(HierarchyContext::new(family, 0), Branch::Euclidean)
    }

    pub fn hyperbolic(family: ConfocalFamily) -> Self {
        Self::new(HierarchyContext::new(family, 0), Branch::Hyperbolic)
    }

    pub fn context(&self) -> &HierarchyContext {
        &self.ctx
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    fn exponent(&self) -> i32 {
        match self.branch {
            Branch::Euclidean => -self.ctx.k(),
            Branch::Hyperbolic => 1 - self.ctx.k(),
        }
    }

    fn family(&self) -> &ConfocalFamily {
        self.ctx.family()
    }

    /// `φ(x)` and `∇φ(x)`.
    fn weight(&self, x: &DVector<f64>) -> Result<(f64, DVector<f64>)> {
        match self.branch {
            Branch::Euclidean => Ok((1.0, DVector::zeros(x.len()))),
            Branch::Hyperbolic => {
                let f = model_defect(self.family(), x);
                if f <= 0.0 {
                    return Err(Error::OutsideModel { f });
                }
                let det = self.family().det();
                let grad = DVector::from_iterator(
                    x.len(),
                    x.iter().zip(self.family().b_f64()).map(|(xi, b)| -2.0 * det * xi / b),
                );
                Ok((det * f, grad))
            }
        }
    }

    fn check_l(&self, x: &DVector<f64>) -> Result<()> {
        // det L = det B · f, so L is singular exactly on ∂Λ.
        if self.exponent() < 0 && model_defect(self.family(), x).abs() < 1e-14 {
            return Err(Error::SingularL);
        }
        Ok(())
    }

    /// Vectors `L^s v` for `s = 0..=count` (`s` negative powers when `inverse`).
    fn powers(&self, x: &DVector<f64>, v: &DVector<f64>, count: usize, inverse: bool) -> Result<Vec<DVector<f64>>> {
        let l = self.family().l_tensor(x);
        let lu = l.clone().lu();
        let mut out = vec![v.clone()];
        for s in 0..count {
            let next = if inverse { lu.solve(&out[s]).ok_or(Error::SingularL)? } else { &l * &out[s] };
            out.push(next);
        }
        Ok(out)
    }
}

impl Metric for HierarchyMetric {
    fn dim(&self) -> usize {
        self.family().dim()
    }

    fn cometric(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_l(x)?;
        let (phi, _) = self.weight(x)?;
        let m = self.exponent();
        let l = self.family().l_tensor(x);
        let d = self.dim();
        let base = if m >= 0 {
            l
        } else {
            l.lu().solve(&DMatrix::identity(d, d)).ok_or(Error::SingularL)?
        };
        let mut out = DMatrix::identity(d, d);
        for _ in 0..m.unsigned_abs() {
            out = &out * &base;
        }
        Ok(out * phi)
    }

    fn kinetic_gradient(&self, x: &DVector<f64>, p: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_l(x)?;
        let (phi, dphi) = self.weight(x)?;
        let m = self.exponent();
        let q = m.unsigned_abs() as usize;
        let pw = self.powers(x, p, q.max(1), m < 0)?;
        let quad = p.dot(&pw[q]);
        // ∂_i ⟨L^m p, p⟩ with ∂_i L = −(e_i xᵀ + x e_iᵀ).
        let mut grad = DVector::zeros(x.len());
        if m > 0 {
            for s in 0..q {
                grad -= &pw[s] * (2.0 * x.dot(&pw[q - 1 - s]));
            }
        } else if m < 0 {
            for s in 1..=q {
                grad += &pw[s] * (2.0 * x.dot(&pw[q + 1 - s]));
            }
        }
        Ok((dphi * quad + grad * phi) * 0.5)
    }

    fn is_flat(&self) -> bool {
        self.branch == Branch::Euclidean && self.ctx.k() == 0
    }

    fn tag(&self) -> String {
        match self.branch {
            Branch::Euclidean => format!("g_{}", self.ctx.k()),
            Branch::Hyperbolic => format!("gbar_{}", self.ctx.k()),
        }
    }
}

/// Jacobi–Maupertuis metric `(h − V)·g`.
pub struct Maupertuis<'a, M: Metric + ?Sized, V: Potential + ?Sized> {
    pub metric: &'a M,
    pub potential: &'a V,
    pub h: f64,
}

/// Pointwise rescaling of `metric` by `h − V(x)`.
pub fn maupertuis_scale<'a, M: Metric + ?Sized, V: Potential + ?Sized>(
    metric: &'a M,
    potential: &'a V,
    h: f64,
) -> Maupertuis<'a, M, V> {
    Maupertuis { metric, potential, h }
}

impl<M: Metric + ?Sized, V: Potential + ?Sized> Maupertuis<'_, M, V> {
    fn gap(&self, x: &DVector<f64>) -> Result<f64> {
        let v = self.potential.value(x);
        if self.h - v <= 0.0 {
            return Err(Error::EnergyBelowPotential { h: self.h, v });
        }
        Ok(self.h - v)
    }
}

impl<M: Metric + ?Sized, V: Potential + ?Sized> Metric for Maupertuis<'_, M, V> {
    fn dim(&self) -> usize {
        self.metric.dim()
    }

    fn cometric(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let gap = self.gap(x)?;
        Ok(self.metric.cometric(x)? / gap)
    }

    fn matrix(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let gap = self.gap(x)?;
        Ok(self.metric.matrix(x)? * gap)
    }

    fn kinetic_gradient(&self, x: &DVector<f64>, p: &DVector<f64>) -> Result<DVector<f64>> {
        let gap = self.gap(x)?;
        let kin = self.metric.kinetic(x, p)?;
        Ok(self.metric.kinetic_gradient(x, p)? / gap + self.potential.gradient(x) * (kin / (gap * gap)))
    }

    fn tag(&self) -> String {
        format!("maupertuis({}, h={})", self.metric.tag(), self.h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::confocal::hyperbolic_metric_at;
    use crate::numeric::int;
    use crate::potentials::ZeroPotential;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fam() -> ConfocalFamily {
        ConfocalFamily::new(vec![int(5), int(3), int(1)]).unwrap()
    }

    #[test]
    fn special_values() {
        let e0 = HierarchyMetric::euclidean(fam());
        let x = DVector::from_vec(vec![0.3, -0.2, 0.1]);
        assert_eq!(e0.matrix(&x).unwrap(), DMatrix::identity(3, 3));
        let e1 = HierarchyMetric::new(HierarchyContext::new(fam(), 1), Branch::Euclidean);
        assert!((e1.matrix(&DVector::zeros(3)).unwrap() - fam().matrix()).abs().max() < 1e-14);
        let h0 = HierarchyMetric::hyperbolic(fam());
        let pi = hyperbolic_metric_at(&fam(), &x).unwrap();
        assert!((h0.matrix(&x).unwrap() - &pi).abs().max() < 1e-12 * pi.abs().max());
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in -2..=2 {
            for branch in [Branch::Euclidean, Branch::Hyperbolic] {
                let g = HierarchyMetric::new(HierarchyContext::new(fam(), k), branch);
                for _ in 0..20 {
                    let x = DVector::from_fn(3, |_, _| rng.gen_range(-0.5..0.5));
                    let p = DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0));
                    let grad = g.kinetic_gradient(&x, &p).unwrap();
                    for i in 0..3 {
                        let h = 1e-6;
                        let mut xp = x.clone();
                        xp[i] += h;
                        let mut xm = x.clone();
                        xm[i] -= h;
                        let fd = (g.kinetic(&xp, &p).unwrap() - g.kinetic(&xm, &p).unwrap()) / (2.0 * h);
                        assert!((fd - grad[i]).abs() < 1e-6 * (1.0 + fd.abs()), "k={k} {branch:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn pi_lk_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for k in -1..=2 {
            let g = HierarchyMetric::new(HierarchyContext::new(fam(), k), Branch::Hyperbolic);
            for _ in 0..1000 {
                let x = DVector::from_fn(3, |_, _| rng.gen_range(-0.5..0.5));
                let m = g.matrix(&x).unwrap();
                assert!((&m - m.transpose()).abs().max() < 1e-10 * m.abs().max());
                assert!(m.cholesky().is_some());
            }
        }
    }

    #[test]
    fn maupertuis_constant_scaling() {
        let g = HierarchyMetric::euclidean(fam());
        let z = ZeroPotential;
        let m = maupertuis_scale(&g, &z, 2.5);
        let x = DVector::from_vec(vec![0.1, 0.2, 0.3]);
        assert_eq!(m.matrix(&x).unwrap(), DMatrix::identity(3, 3) * 2.5);
        let m0 = maupertuis_scale(&g, &z, 0.0);
        assert!(matches!(m0.cometric(&x), Err(Error::EnergyBelowPotential { .. })));
    }
}
