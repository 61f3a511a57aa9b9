mod common;

use common::*;
use proptest::prelude::*;
use tropreg::maxplus::{MaxPlusMatrix, MaxPlusVector};
use tropreg::patterns::{
    classes_of, closest_preimage, domain_interior_point, feasibility_matrix, is_admissible,
    is_feasible, is_realizable, local_map, normal_projection, pattern_of, Pattern, PatternClasses,
};

fn dist(a: &[f64], b: &MaxPlusVector) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y.value()).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn classes(a: &MaxPlusMatrix, p: &Pattern) -> PatternClasses {
    classes_of(p, &domain_interior_point(a, p).unwrap()).unwrap()
}

/// An instance, one of its feasible patterns (chosen by `pick`) and a target.
fn pattern_case(
    max_n: usize,
    max_d: usize,
) -> impl Strategy<Value = (MaxPlusMatrix, Pattern, MaxPlusVector)> {
    (1..=max_n, 1..=max_d)
        .prop_flat_map(|(n, d)| {
            (
                matrix_strategy(n, d, 0.0),
                finite_vec(n, -5.0, 5.0),
                any::<prop::sample::Index>(),
            )
        })
        .prop_map(|(a, y, pick)| {
            let ps = feasible_by_enumeration(&a);
            let p = pick.get(&ps).clone();
            (a, p, y)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn realized_patterns_are_feasible(
        (a, x) in (1usize..7, 1usize..5).prop_flat_map(|(n, d)| (matrix_strategy(n, d, 0.0), finite_vec(d, -5.0, 5.0)))
    ) {
        let p = pattern_of(&a, &x).unwrap();
        prop_assert!(is_feasible(&a, &p).unwrap());
        prop_assert!(is_realizable(&a, &p).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn projection_is_nearest_point_of_extended_image(
        (a, p, y) in pattern_case(4, 3),
        shifts in prop::collection::vec(prop::collection::vec(-3.0..3.0f64, 3), 100),
    ) {
        let cl = classes(&a, &p);
        let phi = normal_projection(&a, &p, &cl, &y).unwrap();
        let (oracle_phi, _) = least_squares_projection(&a, &p, &y);
        for (f, o) in phi.iter().zip(&oracle_phi) {
            prop_assert!((f.value() - o).abs() <= 1e-9);
        }
        let best = dist(&phi.values(), &y);
        for h in &shifts {
            // Move every class by its own increment from the anchor.
            let x: MaxPlusVector = (0..a.cols())
                .map(|j| tropreg::maxplus::ExtReal::finite(cl.anchor()[j].value() + h[cl.class_of(j)]))
                .collect();
            let z = local_map(&a, &p, &x).unwrap();
            prop_assert!(best <= dist(&z.values(), &y) + 1e-8);
        }
    }

    #[test]
    fn preimage_maps_onto_projection((a, p, y) in pattern_case(5, 3)) {
        let cl = classes(&a, &p);
        let phi = normal_projection(&a, &p, &cl, &y).unwrap();
        let psi = closest_preimage(&a, &p, &cl, &y, &MaxPlusVector::neg_inf(a.cols())).unwrap();
        let image = local_map(&a, &p, &psi).unwrap();
        for (u, v) in image.iter().zip(phi.iter()) {
            prop_assert!((u.value() - v.value()).abs() <= 1e-9);
        }
        let support = p.support();
        for j in 0..a.cols() {
            prop_assert_eq!(psi[j].is_finite(), support.contains(&j));
        }
    }

    #[test]
    fn projection_ignores_choice_of_interior_point(
        (a, x, y) in (1usize..6, 1usize..4).prop_flat_map(|(n, d)| (
            matrix_strategy(n, d, 0.0), finite_vec(d, -5.0, 5.0), finite_vec(n, -5.0, 5.0)
        ))
    ) {
        // x realizes its own pattern, so it is as good an anchor as any.
        let p = pattern_of(&a, &x).unwrap();
        let c1 = classes(&a, &p);
        let c2 = classes_of(&p, &x).unwrap();
        prop_assert_eq!(c1.labels(), c2.labels());
        let free = MaxPlusVector::neg_inf(a.cols());
        let (phi1, phi2) = (normal_projection(&a, &p, &c1, &y).unwrap(), normal_projection(&a, &p, &c2, &y).unwrap());
        let (psi1, psi2) = (
            closest_preimage(&a, &p, &c1, &y, &free).unwrap(),
            closest_preimage(&a, &p, &c2, &y, &free).unwrap(),
        );
        for (u, v) in phi1.iter().zip(phi2.iter()).chain(psi1.iter().zip(psi2.iter())) {
            prop_assert_eq!(u.is_finite(), v.is_finite());
            if u.is_finite() {
                prop_assert!((u.value() - v.value()).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn preimage_follows_decreasing_coordinates(
        (a, p, y) in pattern_case(4, 3),
        x in finite_vec(3, -5.0, 5.0),
        coord in 0usize..3,
    ) {
        let d = a.cols();
        let coord = coord % d;
        let cl = classes(&a, &p);
        let x: MaxPlusVector = x.iter().take(d).collect();
        let mut limit = x.entries().to_vec();
        limit[coord] = tropreg::maxplus::ExtReal::NEG_INF;
        let psi_limit = closest_preimage(&a, &p, &cl, &y, &MaxPlusVector::new(limit)).unwrap();
        let mut prev_gap = f64::INFINITY;
        for t in [10, 20, 40] {
            let mut xt = x.entries().to_vec();
            xt[coord] = ext(x[coord].value() - 2f64.powi(t));
            let psi = closest_preimage(&a, &p, &cl, &y, &MaxPlusVector::new(xt)).unwrap();
            for j in 0..d {
                if psi_limit[j].is_finite() {
                    prop_assert!((psi[j].value() - psi_limit[j].value()).abs() <= 1e-9);
                } else {
                    let gap = psi[j].value();
                    prop_assert!(gap < prev_gap.min(-(2f64.powi(t)) + 6.0));
                    prev_gap = gap;
                }
            }
        }
    }
}

proptest! {
    // Each case runs a 41^c grid per feasible pattern.
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn admissibility_matches_geometry(
        (a, y) in (matrix_strategy(4, 3, 0.0), finite_vec(4, -5.0, 5.0))
    ) {
        for p in feasible_by_enumeration(&a) {
            let f = feasibility_matrix(&a, &p).unwrap();
            prop_assert_eq!(&f, &feasibility_by_definition(&a, &p));
            let admissible = is_admissible(&a, &p, &y).unwrap();
            let (phi, pre) = least_squares_projection(&a, &p, &y);
            prop_assert_eq!(admissible, in_closure(&a, &p, &pre, 1e-9));
            let phi_dist = dist(&phi, &y);
            // Nearest points of Cl(X(P)) on a 1e-3 grid around the preimage.
            let support = p.support();
            let mut g = f64::INFINITY;
            let steps = 20i32;
            let offsets: Vec<Vec<i32>> = (0..support.len()).fold(vec![vec![]], |acc, _| {
                acc.into_iter()
                    .flat_map(|v| (-steps..=steps).map(move |s| { let mut w = v.clone(); w.push(s); w }))
                    .collect()
            });
            for off in &offsets {
                let mut x = pre.clone();
                for (k, &j) in support.iter().enumerate() {
                    x[j] += off[k] as f64 * 1e-3;
                }
                if in_closure(&a, &p, &x, 1e-9) {
                    let xv: MaxPlusVector = x.iter().map(|&v| ext(v)).collect();
                    let z = local_map(&a, &p, &xv).unwrap();
                    g = g.min(dist(&z.values(), &y));
                }
            }
            if admissible {
                prop_assert!((g - phi_dist).abs() <= 1e-9);
            } else {
                prop_assert!(g > phi_dist);
            }
        }
    }
}
