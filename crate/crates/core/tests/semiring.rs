mod common;

use common::*;
use proptest::prelude::*;
use tropreg::maxplus::{
    kleene_star, mat_mat, max_cycle_mean, pnorm_distance, ExtReal, MaxPlusMatrix, MaxPlusVector,
    Norm,
};

// Dyadic values keep floating-point addition exact, so the laws hold bitwise.
fn scalar() -> impl Strategy<Value = ExtReal> {
    prop_oneof![
        1 => Just(ExtReal::NEG_INF),
        6 => (-800i32..800).prop_map(|k| ExtReal::finite(k as f64 / 8.0)),
    ]
}

fn dyadic_matrix(n: usize, d: usize) -> impl Strategy<Value = MaxPlusMatrix> {
    prop::collection::vec(scalar(), n * d)
        .prop_map(move |e| MaxPlusMatrix::from_entries(n, d, e).unwrap())
}

proptest! {
    #[test]
    fn semiring_laws(a in scalar(), b in scalar(), c in scalar()) {
        prop_assert_eq!(a.oplus(b).oplus(c), a.oplus(b.oplus(c)));
        prop_assert_eq!(a.otimes(b).otimes(c), a.otimes(b.otimes(c)));
        prop_assert_eq!(a.oplus(b), b.oplus(a));
        prop_assert_eq!(a.otimes(b), b.otimes(a));
        prop_assert_eq!(a.otimes(b.oplus(c)), a.otimes(b).oplus(a.otimes(c)));
        prop_assert_eq!(a.otimes(ExtReal::NEG_INF), ExtReal::NEG_INF);
        prop_assert_eq!(a.oplus(ExtReal::NEG_INF), a);
        prop_assert_eq!(a.otimes(ExtReal::finite(0.0)), a);
    }

    #[test]
    fn mat_mat_is_associative(
        (a, b, c) in (1usize..5, 1usize..5, 1usize..5, 1usize..5)
            .prop_flat_map(|(n, k, l, m)| (dyadic_matrix(n, k), dyadic_matrix(k, l), dyadic_matrix(l, m)))
    ) {
        let left = mat_mat(&mat_mat(&a, &b).unwrap(), &c).unwrap();
        let right = mat_mat(&a, &mat_mat(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn star_solves_its_fixed_point_equation(b in (1usize..6).prop_flat_map(|d| matrix_strategy(d, d, 0.3))) {
        let d = b.rows();
        if let Ok(star) = kleene_star(&b) {
            let lhs = mat_mat(&b, &star).unwrap().oplus(&MaxPlusMatrix::identity(d)).unwrap();
            for i in 0..d {
                prop_assert_eq!(star.get(i, i).value(), 0.0);
                for j in 0..d {
                    let (l, s) = (lhs.get(i, j), star.get(i, j));
                    prop_assert_eq!(l.is_finite(), s.is_finite());
                    if s.is_finite() {
                        prop_assert!((l.value() - s.value()).abs() <= 1e-9);
                    }
                }
            }
        } else {
            prop_assert!(cycle_mean_by_enumeration(&b) > 0.0);
        }
    }

    #[test]
    fn cycle_mean_matches_enumeration(b in (1usize..=6).prop_flat_map(|d| matrix_strategy(d, d, 0.4))) {
        let fast = max_cycle_mean(&b).unwrap();
        let slow = cycle_mean_by_enumeration(&b);
        if slow == NI {
            prop_assert!(fast.is_neg_inf());
        } else {
            prop_assert!((fast.value() - slow).abs() <= 1e-9, "{} vs {}", fast.value(), slow);
        }
    }

    #[test]
    fn pnorm_is_a_metric_on_matched_supports(
        (x, y, z, mask) in (1usize..6).prop_flat_map(|n| (
            prop::collection::vec(-10.0..10.0f64, n),
            prop::collection::vec(-10.0..10.0f64, n),
            prop::collection::vec(-10.0..10.0f64, n),
            prop::collection::vec(any::<bool>(), n),
        ))
    ) {
        let masked = |v: &[f64]| -> MaxPlusVector {
            v.iter().zip(&mask).map(|(&x, &keep)| if keep { ExtReal::finite(x) } else { ExtReal::NEG_INF }).collect()
        };
        let (x, y, z) = (masked(&x), masked(&y), masked(&z));
        for p in [Norm::One, Norm::Two, Norm::Inf] {
            let d = |a: &MaxPlusVector, b: &MaxPlusVector| pnorm_distance(a, b, p).unwrap().value();
            prop_assert_eq!(d(&x, &x), 0.0);
            prop_assert_eq!(d(&x, &y), d(&y, &x));
            prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-12);
        }
    }
}

#[test]
fn mismatched_supports_are_infinitely_far() {
    let x = vecf(&[0.0, 1.0]);
    let y = MaxPlusVector::new(vec![ExtReal::finite(0.0), ExtReal::NEG_INF]);
    assert!(!pnorm_distance(&x, &y, Norm::Two).unwrap().is_finite());
    let e = MaxPlusVector::neg_inf(2);
    assert_eq!(pnorm_distance(&e, &e, Norm::Inf).unwrap().value(), 0.0);
}
