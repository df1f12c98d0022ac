use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::numeric::Rational;

/// Exact rank over ℚ: rows are cleared to integers and reduced by fraction-free
/// (Bareiss) elimination with full pivoting.
pub fn rank_exact(m: &[Vec<Rational>]) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut a: Vec<Vec<BigInt>> = m
        .iter()
        .map(|row| {
            let l = row.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
            row.iter().map(|v| v.numer() * (&l / v.denom())).collect()
        })
        .collect();
    let mut prev = BigInt::one();
    let mut rank = 0;
    for k in 0..rows.min(cols) {
        let pivot = (k..rows).flat_map(|i| (k..cols).map(move |j| (i, j))).find(|&(i, j)| !a[i][j].is_zero());
        let Some((pi, pj)) = pivot else { break };
        a.swap(k, pi);
        for row in a.iter_mut() {
            row.swap(k, pj);
        }
        for i in k + 1..rows {
            for j in k + 1..cols {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
        rank += 1;
    }
    rank
}

/// Numerical rank: singular values above `tol` relative to the largest.
pub fn rank_float(m: &DMatrix<f64>, tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.max();
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * top).count()
}

pub fn to_float_matrix(m: &[Vec<Rational>]) -> DMatrix<f64> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    DMatrix::from_fn(rows, cols, |i, j| crate::numeric::to_f64(&m[i][j]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{int, rat};

    #[test]
    fn small_cases() {
        assert_eq!(rank_exact(&[vec![int(1), int(0)], vec![int(0), int(1)]]), 2);
        assert_eq!(rank_exact(&[vec![int(1), int(2)], vec![int(2), int(4)]]), 1);
        assert_eq!(rank_exact(&[vec![int(0), int(0)]]), 0);
        assert_eq!(rank_exact(&[vec![rat(1, 3), rat(1, 2)], vec![rat(2, 9), rat(1, 3)], vec![int(1), int(0)]]), 2);
    }
}
