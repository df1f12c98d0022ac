use nalgebra::{DMatrix, DVector};

use super::basis::{basis_potential, BasisKind, BasisSpec};
use crate::confocal::{from_elliptic, ConfocalFamily, EllipticCoords};
use crate::error::{Error, Result};

/// Nodes closer than this (relative) are treated as coincident.
const CONFLUENT_TOLERANCE: f64 = 1e-7;

/// Divided difference `f[z_1, …, z_n]`, with coincident nodes handled through
/// `taylor(t, m) = f^{(m)}(t)/m!`.
pub fn divided_difference(nodes: &[f64], taylor: &dyn Fn(f64, usize) -> f64) -> f64 {
    let mut z = nodes.to_vec();
    z.sort_by(f64::total_cmp);
    let n = z.len();
    let scale = z.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let mut table: Vec<f64> = z.iter().map(|&t| taylor(t, 0)).collect();
    for m in 1..n {
        for i in 0..n - m {
            let gap = z[i + m] - z[i];
            table[i] = if gap.abs() <= CONFLUENT_TOLERANCE * scale {
                taylor(z[i], m)
            } else {
                (table[i + 1] - table[i]) / gap
            };
        }
    }
    table[0]
}

fn binomial(n: i64, m: usize) -> f64 {
    (0..m).fold(1.0, |acc, r| acc * (n - r as i64) as f64 / (r + 1) as f64)
}

/// `V(λ) = Σ_j v(λ_j)/∏_{l≠j}(λ_j − λ_l)` with
/// `v(t) = Σ_j α_j t^{d−1+j}` (`j = 0..=k`) for `V_k`, or
/// `v(t) = Σ_j β_j (t − b_i)^{−j}` (`j = 1..=k`) for `W_k^i`.
/// The constants are fitted to the Cartesian element on fixed reference
/// points.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticProfile {
    pub spec: BasisSpec,
    pub d: usize,
    pub pole: Option<f64>,
    /// `α_0..α_k` or `β_1..β_k`.
    pub coeffs: Vec<f64>,
    /// Largest relative misfit at the reference points.
    pub fit_residual: f64,
}

impl EllipticProfile {
    fn taylor(&self, c: usize, t: f64, m: usize) -> f64 {
        match self.pole {
            None => {
                let n = (self.d - 1 + c) as i64;
                if (m as i64) > n {
                    0.0
                } else {
                    binomial(n, m) * t.powi((n - m as i64) as i32)
                }
            }
            Some(a) => {
                let j = (c + 1) as i64;
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                sign * binomial(j + m as i64 - 1, m) * (t - a).powi(-(j as i32) - m as i32)
            }
        }
    }

    fn basis_values(&self, lambda: &[f64]) -> Vec<f64> {
        (0..self.coeffs.len()).map(|c| divided_difference(lambda, &|t, m| self.taylor(c, t, m))).collect()
    }

    /// Value at pairwise distinct `λ`.
    pub fn eval(&self, lambda: &EllipticCoords) -> Result<f64> {
        let l = &lambda.lambda;
        for i in 0..l.len() {
            for j in i + 1..l.len() {
                if l[i] == l[j] {
                    return Err(Error::CoincidentLambdas);
                }
            }
        }
        Ok(self.eval_confluent(l))
    }

    /// Value with coincident coordinates allowed (confluent limit).
    pub fn eval_confluent(&self, lambda: &[f64]) -> f64 {
        self.basis_values(lambda).iter().zip(&self.coeffs).map(|(v, c)| v * c).sum()
    }
}

fn fract(x: f64) -> f64 {
    x - x.floor()
}

/// Deterministic interlacing reference point number `r`.
fn reference_lambda(b: &[f64], r: usize) -> Vec<f64> {
    let d = b.len();
    let steps = [2f64.sqrt(), 3f64.sqrt(), 5f64.sqrt(), 7f64.sqrt(), 11f64.sqrt(), 13f64.sqrt()];
    (0..d)
        .map(|j| {
            let theta = 0.1 + 0.8 * fract(0.5 + (r + 1) as f64 * steps[j % steps.len()]);
            if j + 1 < d {
                b[j + 1] + theta * (b[j] - b[j + 1])
            } else {
                b[d - 1] - theta * (b[0] - b[d - 1])
            }
        })
        .collect()
}

/// Fits the elliptic-coordinate constants of `spec` against the Cartesian
/// basis element.
pub fn elliptic_calibrate(spec: BasisSpec, family: &ConfocalFamily) -> Result<EllipticProfile> {
    let d = family.dim();
    let v = basis_potential(spec, family)?;
    let b = family.b_f64();
    let (pole, count) = match spec.kind {
        BasisKind::V => (None, spec.k as usize + 1),
        BasisKind::W => (Some(b[spec.i.expect("validated")]), spec.k as usize),
    };
    let mut profile = EllipticProfile { spec, d, pole, coeffs: vec![0.0; count], fit_residual: 0.0 };
    let rows = 3 * count + 2;
    let mut a = DMatrix::zeros(rows, count);
    let mut y = DVector::zeros(rows);
    for r in 0..rows {
        let lambda = reference_lambda(b, r);
        let x = from_elliptic(family, &EllipticCoords::new(lambda.clone()), &vec![true; d])?;
        let vals = profile.basis_values(&lambda);
        let target = v.eval(x.as_slice());
        // Rows are weighted by the target size so the fit is relative.
        let w = 1.0 / target.abs().max(1e-300);
        for c in 0..count {
            a[(r, c)] = vals[c] * w;
        }
        y[r] = target * w;
    }
    let coeffs = a.clone().svd(true, true).solve(&y, 1e-14).map_err(|e| Error::Integration(e.to_string()))?;
    profile.fit_residual = (&a * &coeffs - &y).amax();
    profile.coeffs = coeffs.iter().copied().collect();
    Ok(profile)
}

/// Elliptic-coordinate value of the basis element `spec` at `λ`.
pub fn elliptic_form_eval(spec: BasisSpec, family: &ConfocalFamily, lambda: &EllipticCoords) -> Result<f64> {
    elliptic_calibrate(spec, family)?.eval(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::int;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_lambda(b: &[f64], rng: &mut impl Rng) -> Vec<f64> {
        let d = b.len();
        (0..d)
            .map(|j| if j + 1 < d { rng.gen_range(b[j + 1]..b[j]) } else { rng.gen_range(b[d - 1] - 3.0..b[d - 1]) })
            .collect()
    }

    #[test]
    fn divided_difference_of_cubic() {
        let cube = |t: f64, m: usize| binomial(3, m) * t.powi(3 - m as i32);
        assert!((divided_difference(&[1.0, 2.0, 4.0], &cube) - 7.0).abs() < 1e-12);
        assert!((divided_difference(&[2.0, 2.0, 2.0], &cube) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn matches_cartesian_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for fam in [
            ConfocalFamily::new(vec![int(2), int(1)]).unwrap(),
            ConfocalFamily::new(vec![int(5), int(3), int(1)]).unwrap(),
        ] {
            let d = fam.dim();
            let b = fam.b_f64().to_vec();
            for spec in [BasisSpec::v(1), BasisSpec::v(2), BasisSpec::v(3), BasisSpec::w(1, 0), BasisSpec::w(2, d - 1), BasisSpec::w(3, 1)] {
                let profile = elliptic_calibrate(spec, &fam).unwrap();
                let v = basis_potential(spec, &fam).unwrap();
                for _ in 0..100 {
                    let lambda = random_lambda(&b, &mut rng);
                    let x = from_elliptic(&fam, &EllipticCoords::new(lambda.clone()), &vec![true; d]).unwrap();
                    let want = v.eval(x.as_slice());
                    let got = profile.eval(&EllipticCoords::new(lambda.clone())).unwrap();
                    assert!((got - want).abs() <= 1e-10 * want.abs().max(1.0), "{spec} {got} {want}");
                    let mut rev = lambda.clone();
                    rev.reverse();
                    assert!((profile.eval_confluent(&rev) - got).abs() <= 1e-12 * got.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn v_constants_follow_the_boundary_polynomial() {
        // v(t) = −t^{k−1} ∏ (t − b_i)
        let fam = ConfocalFamily::new(vec![int(5), int(3), int(1)]).unwrap();
        let e = [1.0, 9.0, 23.0, 15.0];
        for k in 1..=3usize {
            let p = elliptic_calibrate(BasisSpec::v(k as u32), &fam).unwrap();
            for j in 0..=k {
                let m = k - j;
                let want = if m <= 3 { -(if m % 2 == 0 { 1.0 } else { -1.0 }) * e[m] } else { 0.0 };
                assert!((p.coeffs[j] - want).abs() < 1e-9, "k={k} j={j} {:?}", p.coeffs);
            }
        }
    }

    #[test]
    fn confluent_limit_and_coincidence() {
        let fam = ConfocalFamily::new(vec![int(2), int(1)]).unwrap();
        let p = elliptic_calibrate(BasisSpec::v(2), &fam).unwrap();
        let v = basis_potential(BasisSpec::v(2), &fam).unwrap();
        let limit = v.eval(&[1.0, 0.0]);
        assert!((p.eval_confluent(&[1.0 + 1e-9, 1.0 - 1e-9]) - limit).abs() < 1e-6);
        assert!((p.eval_confluent(&[1.0, 1.0]) - limit).abs() < 1e-12);
        assert!(matches!(p.eval(&EllipticCoords::new(vec![1.0, 1.0])), Err(Error::CoincidentLambdas)));
    }
}
