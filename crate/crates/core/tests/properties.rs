use nalgebra::DVector;
use num_traits::Zero;
use proptest::prelude::*;

use klein_billiards::cayley::{cayley_condition, period_indicator, rank_exact, sqrt_series};
use klein_billiards::confocal::{from_elliptic, line_caustics, to_elliptic, BoundaryQuadric, ConfocalFamily, EllipticCoords, MinkowskiEllipsoid};
use klein_billiards::dynamics::{chord_exit, reflect};
use klein_billiards::hierarchy::HierarchyMetric;
use klein_billiards::numeric::{fmt_rational, int, parse_rational, rat, Rational};
use klein_billiards::poly::Poly;
use klein_billiards::potentials::LaurentPolynomial;

fn family3() -> ConfocalFamily {
    ConfocalFamily::new(vec![int(5), int(3), int(1)]).unwrap()
}

fn rational() -> impl Strategy<Value = Rational> {
    (-50i64..50, 1i64..20).prop_map(|(n, d)| rat(n, d))
}

fn laurent(d: usize) -> impl Strategy<Value = LaurentPolynomial> {
    prop::collection::vec((prop::collection::vec(-3i32..4, d), rational()), 0..6)
        .prop_map(|terms| LaurentPolynomial::from_terms(terms))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rationals_round_trip(r in rational()) {
        prop_assert_eq!(parse_rational(&fmt_rational(&r)).unwrap(), r);
    }

    #[test]
    fn elliptic_chart_round_trip(t in prop::array::uniform3(0.02f64..0.98), signs in prop::array::uniform3(any::<bool>())) {
        let fam = family3();
        let lambda = vec![3.0 + 2.0 * t[0], 1.0 + 2.0 * t[1], 1.0 - 4.0 * t[2]];
        let x = from_elliptic(&fam, &EllipticCoords::new(lambda.clone()), &signs).unwrap();
        let back = to_elliptic(&fam, &x).unwrap();
        for (a, b) in back.lambda.iter().zip(&lambda) {
            prop_assert!((a - b).abs() < 1e-9 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn reflection_keeps_caustics_and_is_involutive(u in prop::array::uniform3(-1.0f64..1.0), w in prop::array::uniform3(-1.0f64..1.0)) {
        let u = DVector::from_row_slice(&u);
        let w = DVector::from_row_slice(&w);
        prop_assume!(u.norm() > 1e-2 && w.norm() > 1e-2);
        let bd = BoundaryQuadric::new(family3(), rat(1, 2)).unwrap();
        let x0 = &u * (0.5 / bd.family().gamma(&u, bd.c_f64()).sqrt());
        let t = chord_exit(&bd, &x0, &w);
        let x = &x0 + &w * t;
        let g = HierarchyMetric::euclidean(bd.family().clone());
        let out = reflect(&bd, &g, &x, &w).unwrap();
        let back = reflect(&bd, &g, &x, &out).unwrap();
        prop_assert!((back - &w).norm() < 1e-12 * w.norm());
        let before = line_caustics(bd.family(), &x, &w).unwrap();
        let after = line_caustics(bd.family(), &x, &out).unwrap();
        prop_assert!(before.max_deviation(&after) < 1e-9);
    }

    #[test]
    fn laurent_text_round_trip(p in laurent(3)) {
        let (q, _) = LaurentPolynomial::from_text(&p.to_text(3)).unwrap();
        prop_assert_eq!(q, p);
    }

    #[test]
    fn laurent_partials_commute(p in laurent(3)) {
        prop_assert_eq!(p.partial(0).partial(2), p.partial(2).partial(0));
        // Euler operator: Σ x_i ∂_i on a homogeneous part is multiplication by its degree.
        let h = p.homogeneous_part(2);
        prop_assert_eq!(h.euler(), h.scale(&int(2)));
    }

    #[test]
    fn series_squares_back(c in prop::collection::vec(rational(), 2..6)) {
        prop_assume!(!c[0].is_zero() && c.iter().skip(1).any(|v| !v.is_zero()));
        let mut c = c;
        while c.last().map_or(false, |v| v.is_zero()) {
            c.pop();
        }
        let p = Poly::new(c.clone());
        let t = sqrt_series(&p, 12).unwrap();
        let s = t.coeffs();
        for k in 0..=12 {
            let sq: Rational = (0..=k).map(|i| &s[i] * &s[k - i]).sum();
            let want = c.get(k).cloned().unwrap_or_default() / &c[0];
            prop_assert_eq!(sq, want);
        }
    }

    #[test]
    fn rank_is_transpose_invariant(m in prop::collection::vec(prop::collection::vec(-3i64..4, 4), 1..5)) {
        let a: Vec<Vec<Rational>> = m.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect();
        let t: Vec<Vec<Rational>> = (0..4).map(|j| a.iter().map(|r| r[j].clone()).collect()).collect();
        let r = rank_exact(&a);
        prop_assert_eq!(r, rank_exact(&t));
        prop_assert!(r <= a.len().min(4));
    }

    #[test]
    fn verdict_and_indicator_are_scale_invariant(a1 in 2i64..9, mu in 1i64..40, s in 1i64..7, n in 2usize..6) {
        let e = MinkowskiEllipsoid::new(vec![int(10), int(a1), int(1)], vec![rat(mu, 7)]);
        prop_assume!(e.is_ok());
        let e = e.unwrap();
        prop_assume!(!e.a().contains(&e.mu()[0]));
        let scaled = e.scaled(&rat(s, 3)).unwrap();
        prop_assert_eq!(cayley_condition(&e, n).unwrap().periodic, cayley_condition(&scaled, n).unwrap().periodic);
        let (i1, i2) = (period_indicator(&e, n).unwrap(), period_indicator(&scaled, n).unwrap());
        prop_assert!((i1 - i2).abs() <= 1e-9 * (1.0 + i1.abs()));
    }
}
