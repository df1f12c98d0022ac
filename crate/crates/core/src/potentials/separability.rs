use std::collections::BTreeSet;

use num_traits::Zero;
use serde::Serialize;

use super::laurent::LaurentPolynomial;
use crate::confocal::ConfocalFamily;
use crate::numeric::{fmt_rational, int, Rational};

/// Residual of the separability system for the pair `(i, j)`, `i < j`
/// (0-based).
#[derive(Debug, Clone, PartialEq)]
pub struct PairResidual {
    pub i: usize,
    pub j: usize,
    pub residual: LaurentPolynomial,
}

/// `(b_i − b_j) ∂²V/∂x_i∂x_j − (x_i ∂_j − x_j ∂_i)(2V + Σ_k x_k ∂_k V)` for
/// every pair `i < j`. `V` is separable in elliptic coordinates iff all of
/// them vanish.
pub fn separability_residual(v: &LaurentPolynomial, family: &ConfocalFamily) -> Vec<PairResidual> {
    let b = family.b();
    let d = family.dim();
    let u = &v.scale(&int(2)) + &v.euler();
    let mut out = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            let mixed = v.partial(i).partial(j).scale(&(&b[i] - &b[j]));
            let rot = &u.partial(j).shift(i, 1) - &u.partial(i).shift(j, 1);
            out.push(PairResidual { i, j, residual: &mixed - &rot });
        }
    }
    out
}

pub fn is_separable(v: &LaurentPolynomial, family: &ConfocalFamily) -> bool {
    separability_residual(v, family).iter().all(|r| r.residual.is_zero())
}

/// One instance of the coefficient recurrence
/// `(b_k − b_l) i_k i_l p_i = |i| (i_l p_{i−2e_k} − i_k p_{i−2e_l})`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecurrenceViolation {
    pub k: usize,
    pub l: usize,
    pub exponent: Vec<i32>,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecurrenceOutcome {
    pub holds: bool,
    pub checked: usize,
    pub violation: Option<RecurrenceViolation>,
}

fn shifted(e: &[i32], i: usize, by: i32) -> Vec<i32> {
    let mut out = e.to_vec();
    out[i] += by;
    out
}

/// Checks every instance of the recurrence whose three coefficients are not
/// all outside the support, working on coefficients only.
pub fn recurrence_check(v: &LaurentPolynomial, family: &ConfocalFamily) -> RecurrenceOutcome {
    let d = family.dim();
    let b = family.b();
    let support: Vec<Vec<i32>> = v
        .terms()
        .map(|(e, _)| {
            let mut full = e.to_vec();
            full.resize(d.max(e.len()), 0);
            full
        })
        .collect();
    let mut checked = 0;
    for k in 0..d {
        for l in k + 1..d {
            let mut candidates: BTreeSet<Vec<i32>> = BTreeSet::new();
            for e in &support {
                candidates.insert(e.clone());
                candidates.insert(shifted(e, k, 2));
                candidates.insert(shifted(e, l, 2));
            }
            for n in candidates {
                checked += 1;
                let total = int(n.iter().sum::<i32>() as i64);
                let lhs = (&b[k] - &b[l]) * int(n[k] as i64) * int(n[l] as i64) * v.coeff(&n);
                let rhs = total
                    * (int(n[l] as i64) * v.coeff(&shifted(&n, k, -2)) - int(n[k] as i64) * v.coeff(&shifted(&n, l, -2)));
                if lhs != rhs {
                    return RecurrenceOutcome {
                        holds: false,
                        checked,
                        violation: Some(RecurrenceViolation { k, l, exponent: n, lhs: fmt_rational(&lhs), rhs: fmt_rational(&rhs) }),
                    };
                }
            }
        }
    }
    RecurrenceOutcome { holds: true, checked, violation: None }
}

/// Residual coefficient of `x^{n − e_k − e_l}` as a linear form in the
/// unknown coefficients: `(exponent, weight)` pairs.
pub(crate) fn recurrence_row(b: &[Rational], k: usize, l: usize, n: &[i32]) -> Vec<(Vec<i32>, Rational)> {
    let total = int(n.iter().sum::<i32>() as i64);
    let mut row = vec![(n.to_vec(), (&b[k] - &b[l]) * int(n[k] as i64) * int(n[l] as i64))];
    row.push((shifted(n, k, -2), -(&total * int(n[l] as i64))));
    row.push((shifted(n, l, -2), &total * int(n[k] as i64)));
    row.retain(|(_, w)| !w.is_zero());
    row
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;

    fn fam() -> ConfocalFamily {
        ConfocalFamily::new(vec![int(3), int(2), rat(1, 2)]).unwrap()
    }

    fn x(i: usize) -> LaurentPolynomial {
        LaurentPolynomial::variable(i)
    }

    #[test]
    fn jacobi_and_rosochatius_are_separable() {
        let jacobi = (0..3).fold(LaurentPolynomial::zero(), |acc, i| &acc + &x(i).pow(2));
        assert!(is_separable(&jacobi, &fam()));
        assert!(recurrence_check(&jacobi, &fam()).holds);
        for i in 0..3 {
            let w = LaurentPolynomial::monomial(&shifted(&[0, 0, 0], i, -2), int(1));
            assert!(is_separable(&w, &fam()));
            assert!(recurrence_check(&w, &fam()).holds);
        }
    }

    #[test]
    fn linear_potential_residual() {
        let r = separability_residual(&x(0), &fam());
        assert_eq!(r[0].residual, x(1).scale(&int(3)));
        assert_eq!(r[1].residual, x(2).scale(&int(3)));
        assert!(r[2].residual.is_zero());
    }

    #[test]
    fn single_square_violates_recurrence() {
        let f2 = ConfocalFamily::new(vec![int(2), int(1)]).unwrap();
        let out = recurrence_check(&x(0).pow(2), &f2);
        assert!(!out.holds);
        let v = out.violation.unwrap();
        assert_eq!((v.k, v.l), (0, 1));
        assert!(!is_separable(&x(0).pow(2), &f2));
    }
}
