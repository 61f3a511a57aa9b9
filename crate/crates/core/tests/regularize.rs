mod common;

use std::sync::Mutex;

use common::*;
use proptest::prelude::*;
use tropreg::maxplus::{residual_norm, MaxPlusVector, Norm};
use tropreg::regularize::{
    augmented_objective, irsls, regularized_objective, BruteInner, InnerSolver, IrslsConfig,
    NewtonInner,
};
use tropreg::solvers::{brute_force_solve, RegressionProblem, SolveReport};
use tropreg::Result;

/// Records how many columns each augmented problem keeps.
struct Recording<I> {
    inner: I,
    widths: Mutex<Vec<usize>>,
}

impl<I: InnerSolver> InnerSolver for Recording<I> {
    fn solve(&self, prob: &RegressionProblem, warm: &MaxPlusVector) -> Result<SolveReport> {
        self.widths
            .lock()
            .unwrap()
            .push(warm.iter().filter(|v| v.is_finite()).count());
        self.inner.solve(prob, warm)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn augmented_objective_tracks_penalty(
        (a, y, x_prev, dir) in (1usize..6, 1usize..4).prop_flat_map(|(n, d)| (
            matrix_strategy(n, d, 0.0),
            finite_vec(n, -5.0, 5.0),
            finite_vec(d, -5.0, 5.0),
            prop::collection::vec(-1.0..1.0f64, d),
        )),
        lambda in 0.0..20.0f64,
    ) {
        let delta = 1e-4;
        let x: MaxPlusVector = x_prev.iter().zip(&dir).map(|(p, u)| ext(p.value() + delta * u)).collect();
        let gap = |x: &MaxPlusVector| {
            augmented_objective(&a, &y, lambda, x, &x_prev).unwrap()
                - regularized_objective(&a, &y, lambda, x).unwrap().total().unwrap()
        };
        prop_assert!((gap(&x) - gap(&x_prev)).abs() <= 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn snapped_coordinates_stay_snapped(
        (a, y) in problem_strategy(5, 3),
        low in -120.0..-60.0f64,
        lambda in 1.0..10.0f64,
    ) {
        let prob = RegressionProblem::new(a.clone(), y.clone()).unwrap();
        let start = brute_force_solve(&prob).unwrap().solution;
        // Push one coordinate far down so it is a snapping candidate.
        let mut x0 = start.entries().to_vec();
        x0[0] = ext(low);
        let x0: MaxPlusVector = x0.iter().map(|v| if v.is_finite() { *v } else { ext(0.0) }).collect();
        let rec = Recording { inner: NewtonInner, widths: Mutex::new(Vec::new()) };
        let rep = irsls(&a, &y, &x0, &IrslsConfig::new(lambda), &rec).unwrap();
        let widths = rec.widths.into_inner().unwrap();
        prop_assert!(widths.windows(2).all(|w| w[1] <= w[0]), "{:?}", widths);
        let kept = rep.solution.iter().filter(|v| v.is_finite()).count();
        prop_assert!(kept <= *widths.last().unwrap());
    }

    #[test]
    fn zero_penalty_with_exact_inner_keeps_the_optimum((a, y) in problem_strategy(4, 3)) {
        let prob = RegressionProblem::new(a.clone(), y.clone()).unwrap();
        let best = brute_force_solve(&prob).unwrap();
        let rep = irsls(&a, &y, &best.solution, &IrslsConfig::new(0.0), &BruteInner).unwrap();
        let r = residual_norm(&a, &y, &rep.solution, Norm::Two).unwrap().value();
        prop_assert!((r * r - best.residual_2norm.value().powi(2)).abs() <= 1e-8);
    }
}

#[test]
fn far_coordinate_is_snapped() {
    let a = mat(&[vec![0.0, 0.0], vec![0.0, 0.0]]);
    let y = vecf(&[0.0, 0.0]);
    let rep = irsls(
        &a,
        &y,
        &vecf(&[0.0, -60.0]),
        &IrslsConfig::new(2.0),
        &BruteInner,
    )
    .unwrap();
    assert!(rep.solution[1].is_neg_inf());
    assert!(rep.solution[0].is_finite());
    assert_eq!(rep.regularization.unwrap().objective.minus_inf(), 1);
}
