use nalgebra::{DMatrix, DVector};

use super::tensors::{char_tensors, s_tensor_gradients};
use super::HierarchyContext;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub x: DVector<f64>,
    pub p: DVector<f64>,
}

impl PhasePoint {
    pub fn new(x: DVector<f64>, p: DVector<f64>) -> Self {
        PhasePoint { x, p }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

/// A function on phase space with analytic first derivatives.
pub trait PhaseFunction {
    fn value(&self, s: &PhasePoint) -> Result<f64>;
    fn grad_x(&self, s: &PhasePoint) -> Result<DVector<f64>>;
    fn grad_p(&self, s: &PhasePoint) -> Result<DVector<f64>>;
}

/// `J_i^k(x, p) = ⟨S_i L^{−k} p, p⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralJ {
    pub ctx: HierarchyContext,
    pub i: usize,
}

impl IntegralJ {
    pub fn new(ctx: HierarchyContext, i: usize) -> Self {
        IntegralJ { ctx, i }
    }

    /// `L^{q} v` for `q = −k`; negative powers by LU solves.
    fn l_power(&self, x: &DVector<f64>, v: &DVector<f64>, q: i32) -> Result<Vec<DVector<f64>>> {
        let l = self.ctx.family().l_tensor(x);
        let lu = l.clone().lu();
        let mut out = vec![v.clone()];
        for s in 0..q.unsigned_abs() as usize {
            let next = if q < 0 { lu.solve(&out[s]).ok_or(Error::SingularL)? } else { &l * &out[s] };
            out.push(next);
        }
        Ok(out)
    }

    fn check(&self, x: &DVector<f64>) -> Result<()> {
        if self.ctx.k() != 0 && crate::confocal::model_defect(self.ctx.family(), x).abs() < 1e-14 {
            return Err(Error::SingularL);
        }
        Ok(())
    }
}

impl PhaseFunction for IntegralJ {
    fn value(&self, s: &PhasePoint) -> Result<f64> {
        self.check(&s.x)?;
        let (_, st) = char_tensors(&self.ctx, &s.x);
        let w = self.l_power(&s.x, &s.p, -self.ctx.k())?.pop().expect("nonempty");
        Ok(s.p.dot(&(&st.s[self.i] * w)))
    }

    fn grad_p(&self, s: &PhasePoint) -> Result<DVector<f64>> {
        self.check(&s.x)?;
        let (_, st) = char_tensors(&self.ctx, &s.x);
        let w = self.l_power(&s.x, &s.p, -self.ctx.k())?.pop().expect("nonempty");
        Ok(&st.s[self.i] * w * 2.0)
    }

    fn grad_x(&self, s: &PhasePoint) -> Result<DVector<f64>> {
        self.check(&s.x)?;
        let x = &s.x;
        let p = &s.p;
        let q = -self.ctx.k();
        let (_, st) = char_tensors(&self.ctx, x);
        let ds = s_tensor_gradients(self.ctx.family(), x);
        let pw = self.l_power(x, p, q)?;
        let w = &pw[pw.len() - 1];
        let u = &st.s[self.i] * p;
        let uw = self.l_power(x, &u, q)?;
        let n = q.unsigned_abs() as usize;
        // aᵀ (∂_m L) b = −(a_m xᵀb + xᵀa b_m)
        let dl = |a: &DVector<f64>, b: &DVector<f64>| -> DVector<f64> { -(a * x.dot(b) + b * x.dot(a)) };
        let mut grad = DVector::from_iterator(x.len(), (0..x.len()).map(|m| p.dot(&(&ds[self.i][m] * w))));
        if q > 0 {
            for s in 0..n {
                grad += dl(&uw[s], &pw[n - 1 - s]);
            }
        } else if q < 0 {
            for s in 0..n {
                grad -= dl(&uw[s + 1], &pw[n - s]);
            }
        }
        Ok(grad)
    }
}

/// Canonical bracket `Σ (∂F/∂x · ∂G/∂p − ∂F/∂p · ∂G/∂x)` from analytic gradients.
pub fn poisson_bracket(f: &dyn PhaseFunction, g: &dyn PhaseFunction, s: &PhasePoint) -> Result<f64> {
    Ok(f.grad_x(s)?.dot(&g.grad_p(s)?) - f.grad_p(s)?.dot(&g.grad_x(s)?))
}

fn fd_gradients(f: &dyn PhaseFunction, s: &PhasePoint, h: f64) -> Result<(DVector<f64>, DVector<f64>)> {
    let d = s.dim();
    let mut gx = DVector::zeros(d);
    let mut gp = DVector::zeros(d);
    for i in 0..d {
        let mut a = s.clone();
        let mut b = s.clone();
        a.x[i] += h;
        b.x[i] -= h;
        gx[i] = (f.value(&a)? - f.value(&b)?) / (2.0 * h);
        let mut a = s.clone();
        let mut b = s.clone();
        a.p[i] += h;
        b.p[i] -= h;
        gp[i] = (f.value(&a)? - f.value(&b)?) / (2.0 * h);
    }
    Ok((gx, gp))
}

/// Central finite-difference version of the bracket.
pub fn poisson_bracket_fd(f: &dyn PhaseFunction, g: &dyn PhaseFunction, s: &PhasePoint) -> Result<f64> {
    let h = 1e-5;
    let (fx, fp) = fd_gradients(f, s, h)?;
    let (gx, gp) = fd_gradients(g, s, h)?;
    Ok(fx.dot(&gp) - fp.dot(&gx))
}

/// Smallest singular value of the row-normalised gradient matrix of the
/// integrals `J_0^k, …, J_{d−1}^k`.
pub fn independence_measure(ctx: &HierarchyContext, s: &PhasePoint) -> Result<f64> {
    let d = ctx.family().dim();
    let mut m = DMatrix::zeros(d, 2 * d);
    for i in 0..d {
        let j = IntegralJ::new(ctx.clone(), i);
        let g: Vec<f64> = j.grad_x(s)?.iter().chain(j.grad_p(s)?.iter()).copied().collect();
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (c, v) in g.iter().enumerate() {
            m[(i, c)] = v / norm;
        }
    }
    Ok(m.svd(false, false).singular_values.min())
}
