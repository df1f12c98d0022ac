use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};

use super::laurent::LaurentPolynomial;
use super::separability::recurrence_row;
use crate::confocal::ConfocalFamily;
use crate::error::{Error, Result};
use crate::numeric::{int, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum BasisKind {
    /// Polynomial element of degree `2k`.
    V,
    /// `x_i^{−2k}` times a polynomial of degree `2(k − 1)`.
    W,
}

/// A basis element: `V_k`, or `W_k^i` with `i` 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisSpec {
    pub kind: BasisKind,
    pub k: u32,
    pub i: Option<usize>,
}

impl BasisSpec {
    pub fn v(k: u32) -> Self {
        BasisSpec { kind: BasisKind::V, k, i: None }
    }

    pub fn w(k: u32, i: usize) -> Self {
        BasisSpec { kind: BasisKind::W, k, i: Some(i) }
    }

    fn validate(&self, d: usize) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameters("basis index k must be ≥ 1".into()));
        }
        match (self.kind, self.i) {
            (BasisKind::V, None) => Ok(()),
            (BasisKind::W, Some(i)) if i < d => Ok(()),
            _ => Err(Error::InvalidParameters(format!("bad axis for {self} in dimension {d}"))),
        }
    }
}

impl fmt::Display for BasisSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.i {
            None => write!(f, "V{}", self.k),
            Some(i) => write!(f, "W{}_{}", self.k, i + 1),
        }
    }
}

/// `V<k>` or `W<k>_<i>` with a 1-based axis.
impl FromStr for BasisSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("`{s}` is not a basis name like V3 or W2_1"));
        let s = s.trim();
        let (head, rest) = s.split_at(s.char_indices().nth(1).map_or(s.len(), |(p, _)| p));
        match head {
            "V" | "v" => rest.parse().map(BasisSpec::v).map_err(|_| bad()),
            "W" | "w" => {
                let (k, i) = rest.split_once('_').ok_or_else(bad)?;
                let i: usize = i.parse().map_err(|_| bad())?;
                if i == 0 {
                    return Err(bad());
                }
                Ok(BasisSpec::w(k.parse().map_err(|_| bad())?, i - 1))
            }
            _ => Err(bad()),
        }
    }
}

fn unit(d: usize, i: usize, by: i32) -> Vec<i32> {
    let mut e = vec![0; d];
    e[i] = by;
    e
}

/// Even exponent vectors `2m`, `m ≥ 0`, `|m| ≤ top`.
fn even_exponents(d: usize, top: i32) -> Vec<Vec<i32>> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|e: Vec<i32>| {
                let used: i32 = e.iter().sum::<i32>() / 2;
                (0..=top - used).map(move |m| {
                    let mut next = e.clone();
                    next.push(2 * m);
                    next
                })
            })
            .collect();
    }
    out
}

/// Kernel basis of a sparse rational system (rows of `(column, weight)`).
fn nullspace(rows: &[Vec<(usize, Rational)>], ncols: usize) -> Vec<Vec<Rational>> {
    let mut m: Vec<Vec<Rational>> = rows
        .iter()
        .map(|r| {
            let mut dense = vec![Rational::zero(); ncols];
            for (c, w) in r {
                dense[*c] += w;
            }
            dense
        })
        .collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let Some(p) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else { continue };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for v in m[row].iter_mut() {
            *v *= &inv;
        }
        for r in 0..m.len() {
            if r != row && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in col..ncols {
                    let delta = &f * &m[row][c];
                    m[r][c] -= delta;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == m.len() {
            break;
        }
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); ncols];
            v[f] = Rational::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[r][f].clone();
            }
            v
        })
        .collect()
}

/// Solves the square system `a·c = rhs` exactly; `None` when singular.
fn solve_square(mut a: Vec<Vec<Rational>>, mut rhs: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = rhs.len();
    for col in 0..n {
        let p = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, p);
        rhs.swap(col, p);
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = &a[r][col] / &a[col][col];
                for c in col..n {
                    let delta = &f * &a[col][c];
                    a[r][c] -= delta;
                }
                let delta = &f * &rhs[col];
                rhs[r] -= delta;
            }
        }
    }
    Some((0..n).map(|i| &rhs[i] / &a[i][i]).collect())
}

/// Basis element obtained by solving the coefficient recurrence exactly on
/// the ansatz of the given kind, then fixing the free constants through the
/// profile on one coordinate axis:
///
/// * `V_k`: on the `x_1`-axis, `V_k = x_1²(b_1 − x_1²)^{k−1}`;
/// * `W_k^i`: on the `x_i`-axis, `W_k^i = x_i^{−2k}`.
///
/// The solution space on the ansatz must have dimension `k + 1` (`V`, spanned
/// by `1, V_1, …, V_k`) or `k` (`W`, spanned by `W_1^i, …, W_k^i`).
pub fn basis_potential(spec: BasisSpec, family: &ConfocalFamily) -> Result<LaurentPolynomial> {
    family.require_strict()?;
    let d = family.dim();
    spec.validate(d)?;
    let k = spec.k as i32;
    let (monomials, axis, profile, expected): (Vec<Vec<i32>>, usize, LaurentPolynomial, usize) = match spec.kind {
        BasisKind::V => {
            let y = LaurentPolynomial::variable(0).pow(2);
            let b1 = LaurentPolynomial::constant(family.b()[0].clone());
            (even_exponents(d, k), 0, &y * &(&b1 - &y).pow(spec.k - 1), spec.k as usize + 1)
        }
        BasisKind::W => {
            let i = spec.i.expect("validated");
            let mons = even_exponents(d, k - 1)
                .into_iter()
                .map(|mut e| {
                    e[i] -= 2 * k;
                    e
                })
                .collect();
            (mons, i, LaurentPolynomial::monomial(&unit(d, i, -2 * k), int(1)), spec.k as usize)
        }
    };
    let index: BTreeMap<Vec<i32>, usize> = monomials.iter().cloned().enumerate().map(|(c, e)| (e, c)).collect();
    let mut rows = Vec::new();
    for a in 0..d {
        for l in a + 1..d {
            let mut targets = BTreeSet::new();
            for e in &monomials {
                targets.insert(e.clone());
                let mut s = e.clone();
                s[a] += 2;
                targets.insert(s);
                let mut s = e.clone();
                s[l] += 2;
                targets.insert(s);
            }
            for n in targets {
                let row: Vec<(usize, Rational)> = recurrence_row(family.b(), a, l, &n)
                    .into_iter()
                    .filter_map(|(e, w)| index.get(&e).map(|&c| (c, w)))
                    .collect();
                if !row.is_empty() {
                    rows.push(row);
                }
            }
        }
    }
    let kernel = nullspace(&rows, monomials.len());
    if kernel.len() != expected {
        return Err(Error::UnderdeterminedNormalization { kernel: kernel.len() });
    }
    // Axis profile: the pure powers of x_axis in the ansatz.
    let axis_cols: Vec<usize> =
        monomials.iter().enumerate().filter(|(_, e)| e.iter().enumerate().all(|(j, &v)| j == axis || v == 0)).map(|(c, _)| c).collect();
    if axis_cols.len() != expected {
        return Err(Error::UnderdeterminedNormalization { kernel: kernel.len() });
    }
    let a: Vec<Vec<Rational>> = axis_cols.iter().map(|&c| kernel.iter().map(|v| v[c].clone()).collect()).collect();
    let rhs: Vec<Rational> = axis_cols.iter().map(|&c| profile.coeff(&monomials[c])).collect();
    let weights = solve_square(a, rhs).ok_or(Error::UnderdeterminedNormalization { kernel: kernel.len() })?;
    let mut out = LaurentPolynomial::new();
    for (col, e) in monomials.iter().enumerate() {
        let c = weights.iter().zip(&kernel).fold(Rational::zero(), |acc, (w, v)| acc + w * &v[col]);
        out.add_term(e.clone(), c);
    }
    Ok(out)
}

fn power_sum(d: usize, weight: impl Fn(usize) -> Rational) -> LaurentPolynomial {
    LaurentPolynomial::from_terms((0..d).map(|j| (unit(d, j, 2), weight(j))))
}

/// Closed forms of `V_1, V_2, V_3, W_1^i, W_2^i, W_3^i`. `V_3` and `W_3^i` are
/// the separable versions; see [`printed_catalog_potential`].
pub fn catalog_potential(spec: BasisSpec, family: &ConfocalFamily) -> Result<LaurentPolynomial> {
    catalog(spec, family, false)
}

/// The same closed forms as they are commonly printed: `V_3` with
/// `(Σx²)²(Σbx²)` in the middle term and `W_3^i` with squared differences in
/// the double sum. Neither printed form solves the separability system.
pub fn printed_catalog_potential(spec: BasisSpec, family: &ConfocalFamily) -> Result<LaurentPolynomial> {
    catalog(spec, family, true)
}

fn catalog(spec: BasisSpec, family: &ConfocalFamily, printed: bool) -> Result<LaurentPolynomial> {
    family.require_strict()?;
    let d = family.dim();
    spec.validate(d)?;
    let b = family.b();
    let s = power_sum(d, |_| int(1));
    let sb = power_sum(d, |j| b[j].clone());
    let sbb = power_sum(d, |j| &b[j] * &b[j]);
    let two = LaurentPolynomial::constant(int(2));
    let one = LaurentPolynomial::one();
    match (spec.kind, spec.k) {
        (BasisKind::V, 1) => Ok(s),
        (BasisKind::V, 2) => Ok(&sb - &s.pow(2)),
        (BasisKind::V, 3) => {
            let middle = if printed { &s.pow(2) * &sb } else { &s * &sb };
            Ok(&(&sbb - &(&two * &middle)) + &s.pow(3))
        }
        (BasisKind::W, k @ 1..=3) => {
            let i = spec.i.expect("validated");
            let inv = |j: usize| (&b[i] - &b[j]).recip();
            let others: Vec<usize> = (0..d).filter(|&j| j != i).collect();
            let mut p = one;
            if k >= 2 {
                let factor = if k == 3 { int(2) } else { int(1) };
                p = &p + &power_sum(d, |j| if j == i { Rational::zero() } else { &factor * inv(j) });
            }
            if k == 3 {
                let xi2 = LaurentPolynomial::monomial(&unit(d, i, 2), int(1));
                p = &p + &(&xi2 * &power_sum(d, |j| if j == i { Rational::zero() } else { inv(j) * inv(j) }));
                for &j in &others {
                    for &l in &others {
                        let w = if printed { inv(j) * inv(j) * inv(l) * inv(l) } else { inv(j) * inv(l) };
                        let mut e = unit(d, j, 2);
                        e[l] += 2;
                        p.add_term(e, w);
                    }
                }
            }
            Ok(p.shift(i, -2 * k as i32))
        }
        _ => Err(Error::InvalidParameters(format!("{spec} has no catalog closed form"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;
    use crate::potentials::separability::{is_separable, recurrence_check};

    fn fam() -> ConfocalFamily {
        ConfocalFamily::new(vec![int(5), rat(7, 2), int(2)]).unwrap()
    }

    #[test]
    fn names_round_trip() {
        for s in ["V3", "W2_1", "W1_3"] {
            assert_eq!(s.parse::<BasisSpec>().unwrap().to_string(), s);
        }
        assert!("W2_0".parse::<BasisSpec>().is_err());
        assert!("X1".parse::<BasisSpec>().is_err());
    }

    #[test]
    fn generated_matches_catalog() {
        let f = fam();
        for k in 1..=3 {
            let v = BasisSpec::v(k);
            assert_eq!(basis_potential(v, &f).unwrap(), catalog_potential(v, &f).unwrap(), "{v}");
            for i in 0..3 {
                let w = BasisSpec::w(k, i);
                assert_eq!(basis_potential(w, &f).unwrap(), catalog_potential(w, &f).unwrap(), "{w}");
            }
        }
    }

    #[test]
    fn printed_forms_are_not_separable() {
        let f = fam();
        assert!(!is_separable(&printed_catalog_potential(BasisSpec::v(3), &f).unwrap(), &f));
        assert!(!is_separable(&printed_catalog_potential(BasisSpec::w(3, 0), &f).unwrap(), &f));
        assert!(is_separable(&printed_catalog_potential(BasisSpec::w(2, 0), &f).unwrap(), &f));
    }

    #[test]
    fn higher_elements_are_separable() {
        let f = fam();
        for k in 4..=5 {
            let v = basis_potential(BasisSpec::v(k), &f).unwrap();
            assert!(is_separable(&v, &f) && recurrence_check(&v, &f).holds);
            let sign = if k % 2 == 1 { int(1) } else { int(-1) };
            let top = power_sum(3, |_| int(1)).pow(k).scale(&sign);
            assert_eq!(v.homogeneous_part(2 * k as i32), top);
            let w = basis_potential(BasisSpec::w(k, 1), &f).unwrap();
            assert!(is_separable(&w, &f));
        }
    }
}
