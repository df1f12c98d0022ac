use std::ops::{Add, Div, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_traits::{FromPrimitive, One, Zero};

use super::HierarchyContext;
use crate::confocal::ConfocalFamily;
use crate::numeric::Rational;

/// `S_0, …, S_{d−1}` at a point: coefficients of `adj(L + αI) = Σ_l S_l α^l`.
#[derive(Debug, Clone, PartialEq)]
pub struct STensorSet {
    pub s: Vec<DMatrix<f64>>,
}

impl STensorSet {
    /// `Σ_l S_l α^l`.
    pub fn combine(&self, alpha: f64) -> DMatrix<f64> {
        self.s.iter().rev().fold(DMatrix::zeros(self.s[0].nrows(), self.s[0].ncols()), |acc, s| acc * alpha + s)
    }
}

type Square<T> = Vec<Vec<T>>;

fn matmul<T>(a: &Square<T>, b: &Square<T>) -> Square<T>
where
    T: Clone + Zero,
    for<'a> &'a T: Add<&'a T, Output = T> + Mul<&'a T, Output = T>,
{
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).fold(T::zero(), |acc, k| &acc + &(&a[i][k] * &b[k][j]))).collect())
        .collect()
}

/// Faddeev–LeVerrier recursion for `A = −L`:
/// `M_1 = I`, `c_{d−k} = −tr(A M_k)/k`, `M_{k+1} = A M_k + c_{d−k} I`,
/// giving `adj(αI − A) = Σ_k M_k α^{d−k}`; hence `S_{d−k} = M_k`.
pub(crate) fn leverrier<T>(l: &Square<T>) -> Vec<Square<T>>
where
    T: Clone + Zero + One + Neg<Output = T> + FromPrimitive,
    for<'a> &'a T: Add<&'a T, Output = T> + Sub<&'a T, Output = T> + Mul<&'a T, Output = T> + Div<&'a T, Output = T>,
{
    let d = l.len();
    let a: Square<T> = l.iter().map(|r| r.iter().map(|v| -v.clone()).collect()).collect();
    let ident: Square<T> = (0..d).map(|i| (0..d).map(|j| if i == j { T::one() } else { T::zero() }).collect()).collect();
    let mut m = vec![ident];
    for k in 1..d {
        let am = matmul(&a, &m[k - 1]);
        let tr = (0..d).fold(T::zero(), |acc, i| &acc + &am[i][i]);
        let c = -(&tr / &T::from_usize(k).expect("small integer"));
        let next = (0..d)
            .map(|i| (0..d).map(|j| if i == j { &am[i][j] + &c } else { am[i][j].clone() }).collect())
            .collect();
        m.push(next);
    }
    // m[k-1] = M_k = S_{d-k}
    m.reverse();
    m
}

fn to_square(m: &DMatrix<f64>) -> Square<f64> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

fn from_square(s: &Square<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(s.len(), s.len(), |i, j| s[i][j])
}

/// `L = B − x ⊗ x` and the tensors `S_l`.
pub fn char_tensors(ctx: &HierarchyContext, x: &DVector<f64>) -> (DMatrix<f64>, STensorSet) {
    let l = ctx.family().l_tensor(x);
    let s = leverrier(&to_square(&l)).iter().map(from_square).collect();
    (l, STensorSet { s })
}

/// Exact `L` and `S_l` for rational points.
pub fn char_tensors_exact(family: &ConfocalFamily, x: &[Rational]) -> (Square<Rational>, Vec<Square<Rational>>) {
    let d = family.dim();
    let b = family.b();
    let l: Square<Rational> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let xx = &x[i] * &x[j];
                    if i == j {
                        &b[i] - &xx
                    } else {
                        -xx
                    }
                })
                .collect()
        })
        .collect();
    let s = leverrier(&l);
    (l, s)
}

/// `∂S_l/∂x_m`, indexed `[l][m]`, from the differentiated recursion with
/// `∂A/∂x_m = e_m xᵀ + x e_mᵀ`.
pub fn s_tensor_gradients(family: &ConfocalFamily, x: &DVector<f64>) -> Vec<Vec<DMatrix<f64>>> {
    let d = family.dim();
    let a = -family.l_tensor(x);
    let mut out = vec![Vec::with_capacity(d); d];
    for mdir in 0..d {
        let mut da = DMatrix::zeros(d, d);
        for i in 0..d {
            da[(mdir, i)] += x[i];
            da[(i, mdir)] += x[i];
        }
        let mut m = DMatrix::identity(d, d);
        let mut dm = DMatrix::zeros(d, d);
        out[d - 1].push(dm.clone());
        for k in 1..d {
            let am = &a * &m;
            let dam = &da * &m + &a * &dm;
            let c = -am.trace() / k as f64;
            let dc = -dam.trace() / k as f64;
            m = am + DMatrix::identity(d, d) * c;
            dm = dam + DMatrix::identity(d, d) * dc;
            out[d - 1 - k].push(dm.clone());
        }
    }
    out
}

/// Closed form `det B_α ((1 − ⟨B_α⁻¹x, x⟩) B_α⁻¹ + B_α⁻¹x ⊗ B_α⁻¹x)` of
/// `adj(L + αI)`, with `B_α = B + αI`.
pub fn closed_form_adjugate(family: &ConfocalFamily, x: &DVector<f64>, alpha: f64) -> DMatrix<f64> {
    let ba: Vec<f64> = family.b_f64().iter().map(|b| b + alpha).collect();
    let det: f64 = ba.iter().product();
    let y = DVector::from_iterator(x.len(), x.iter().zip(&ba).map(|(xi, b)| xi / b));
    let q = y.dot(x);
    let binv = DMatrix::from_diagonal(&DVector::from_iterator(ba.len(), ba.iter().map(|b| 1.0 / b)));
    (binv * (1.0 - q) + &y * y.transpose()) * det
}

/// Largest relative deviation between `Σ S_l α^l` and the closed form over
/// `α = 1, …, d+1`.
pub fn closed_form_deviation(ctx: &HierarchyContext, x: &DVector<f64>) -> f64 {
    let (_, s) = char_tensors(ctx, x);
    (1..=ctx.family().dim() + 1)
        .map(|a| {
            let a = a as f64;
            let lhs = s.combine(a);
            let rhs = closed_form_adjugate(ctx.family(), x, a);
            (&lhs - &rhs).abs().max() / rhs.abs().max().max(1e-300)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{int, rat};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ctx(b: &[i64]) -> HierarchyContext {
        HierarchyContext::new(ConfocalFamily::new(b.iter().map(|&v| int(v)).collect()).unwrap(), 0)
    }

    /// Adjugate by cofactors, for the exact identity check.
    fn adjugate(m: &Square<Rational>) -> Square<Rational> {
        let n = m.len();
        let minor_det = |skip_r: usize, skip_c: usize| -> Rational {
            let sub: Square<Rational> = (0..n)
                .filter(|&i| i != skip_r)
                .map(|i| (0..n).filter(|&j| j != skip_c).map(|j| m[i][j].clone()).collect())
                .collect();
            det(&sub)
        };
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let v = minor_det(j, i);
                        if (i + j) % 2 == 0 {
                            v
                        } else {
                            -v
                        }
                    })
                    .collect()
            })
            .collect()
    }

    fn det(m: &Square<Rational>) -> Rational {
        let n = m.len();
        if n == 0 {
            return int(1);
        }
        (0..n)
            .map(|j| {
                let sub: Square<Rational> =
                    (1..n).map(|i| (0..n).filter(|&c| c != j).map(|c| m[i][c].clone()).collect()).collect();
                let t = &m[0][j] * det(&sub);
                if j % 2 == 0 {
                    t
                } else {
                    -t
                }
            })
            .fold(int(0), |a, b| a + b)
    }

    #[test]
    fn origin_values() {
        let c = ctx(&[2, 1]);
        let (l, s) = char_tensors(&c, &DVector::zeros(2));
        assert_eq!(l, DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0])));
        assert_eq!(s.s[1], DMatrix::identity(2, 2));
        assert_eq!(s.s[0], DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0])));
        let (l, _) = char_tensors(&c, &DVector::from_vec(vec![1.0, 0.5]));
        assert_eq!(l, DMatrix::from_row_slice(2, 2, &[1.0, -0.5, -0.5, 0.75]));
    }

    #[test]
    fn exact_adjugate_identity() {
        let fam = ConfocalFamily::new(vec![int(5), int(3), int(1)]).unwrap();
        let x = [rat(1, 2), rat(-2, 3), rat(3, 7)];
        let (l, s) = char_tensors_exact(&fam, &x);
        assert!(s[2].iter().enumerate().all(|(i, r)| r.iter().enumerate().all(|(j, v)| *v == if i == j { int(1) } else { int(0) })));
        for alpha in 1..=3 {
            let a = int(alpha);
            let shifted: Square<Rational> = l
                .iter()
                .enumerate()
                .map(|(i, r)| r.iter().enumerate().map(|(j, v)| if i == j { v + &a } else { v.clone() }).collect())
                .collect();
            let adj = adjugate(&shifted);
            for i in 0..3 {
                for j in 0..3 {
                    let combined = s.iter().rev().fold(int(0), |acc, sl| acc * &a + &sl[i][j]);
                    assert_eq!(combined, adj[i][j]);
                }
            }
        }
    }

    #[test]
    fn closed_form_and_gradients() {
        let c = ctx(&[5, 3, 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let x = DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0));
            assert!(closed_form_deviation(&c, &x) < 1e-12);
            let grads = s_tensor_gradients(c.family(), &x);
            let h = 1e-6;
            for m in 0..3 {
                let mut xp = x.clone();
                xp[m] += h;
                let mut xm = x.clone();
                xm[m] -= h;
                let (_, sp) = char_tensors(&c, &xp);
                let (_, sm) = char_tensors(&c, &xm);
                for l in 0..3 {
                    let fd = (&sp.s[l] - &sm.s[l]) / (2.0 * h);
                    assert!((&fd - &grads[l][m]).abs().max() < 1e-7);
                }
            }
        }
    }
}
