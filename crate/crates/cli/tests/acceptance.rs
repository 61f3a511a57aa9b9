//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use tropreg::exec::Execution;
use tropreg::hardness::{build_reduction, catalog, descent_exists_binary, setcover_bruteforce};
use tropreg::maxplus::{mat_vec, max_cycle_mean, residual, ExtReal, MaxPlusMatrix, MaxPlusVector};
use tropreg::patterns::{
    classes_of, closest_preimage, domain_interior_point, feasibility_matrix, is_admissible,
    normal_projection, Pattern,
};
use tropreg::reduction::{reduce, Verdict};
use tropreg::regularize::{augmented_objective, regularized_objective};
use tropreg::rng::{derive_seed, Rng};
use tropreg::solvers::{
    brute_force_solve, infnorm_solve, multistart_newton_with, RegressionProblem,
};
use tropreg::sysid::{
    evidence_matrix, example_system, frobenius_residual, identify, simulate, IdentifyConfig,
};

const NI: f64 = f64::NEG_INFINITY;

/// `(y, Φ, Ψ, admissible)`.
type ProjectionCase = (&'static [f64], &'static [f64], &'static [f64], bool);

type Criterion = (&'static str, Duration, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn mat(rows: &[Vec<f64>]) -> MaxPlusMatrix {
    MaxPlusMatrix::from_rows(rows).unwrap()
}

fn vecf(v: &[f64]) -> MaxPlusVector {
    MaxPlusVector::from_f64(v).unwrap()
}

fn close(v: &MaxPlusVector, want: &[f64], tol: f64) -> bool {
    v.len() == want.len()
        && v.iter()
            .zip(want)
            .all(|(x, w)| x.is_finite() && (x.value() - w).abs() <= tol)
}

fn worked_example() -> RegressionProblem {
    RegressionProblem::new(
        mat(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]),
        vecf(&[1.0, 1.0, 1.0]),
    )
    .unwrap()
}

/// `n <= max_n`, `d <= max_d`, entries uniform in `[-5, 5]`.
fn random_problem(rng: &mut Rng, max_n: usize, max_d: usize) -> RegressionProblem {
    let n = 1 + rng.below(max_n as u64) as usize;
    let d = 1 + rng.below(max_d as u64) as usize;
    fixed_problem(rng, n, d)
}

fn fixed_problem(rng: &mut Rng, n: usize, d: usize) -> RegressionProblem {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.uniform(-5.0, 5.0)).collect())
        .collect();
    let y: Vec<f64> = (0..n).map(|_| rng.uniform(-5.0, 5.0)).collect();
    RegressionProblem::new(mat(&rows), vecf(&y)).unwrap()
}

fn two_norm_example() -> Outcome {
    let rep = brute_force_solve(&worked_example()).unwrap();
    let r = rep.residual_2norm.value();
    let image = mat_vec(worked_example().a(), &rep.solution).unwrap();
    let fits = close(&image, &[0.5, 1.5, 1.0], 1e-9) || close(&image, &[0.5, 1.0, 1.5], 1e-9);
    let ok = (r - 0.5f64.sqrt()).abs() <= 1e-9 && fits;
    outcome(
        ok,
        format!(
            "residual {r}, A x = [{}]",
            tropreg::text::join_vector(&image)
        ),
    )
}

fn inf_norm_example() -> Outcome {
    let r = infnorm_solve(&worked_example())
        .unwrap()
        .residual_infnorm
        .unwrap()
        .value();
    outcome((r - 0.5).abs() <= 1e-9, format!("residual {r}"))
}

fn projection_example() -> Outcome {
    let a = worked_example().a().clone();
    let p = Pattern::parse("1;1;2", 2).unwrap();
    let f = feasibility_matrix(&a, &p).unwrap();
    let f_ok = f == mat(&[vec![0.0, 0.0], vec![-1.0, 0.0]]);
    let lambda = max_cycle_mean(&f).unwrap();
    let x_p = domain_interior_point(&a, &p).unwrap();
    let cl = classes_of(&p, &x_p).unwrap();
    let free = MaxPlusVector::neg_inf(2);
    let mut failures = Vec::new();
    if !f_ok {
        failures.push("F_P".to_string());
    }
    if lambda.value() != 0.0 {
        failures.push(format!("cycle mean {}", lambda.value()));
    }
    if !close(&x_p, &[0.0, -0.5], 1e-9) {
        failures.push("interior point".into());
    }
    let cases: [ProjectionCase; 2] = [
        (&[0.0, 0.5, 0.0], &[-0.25, 0.75, 0.0], &[-0.25, -1.0], true),
        (&[0.0, 1.5, 2.0], &[0.25, 1.25, 2.0], &[0.25, 1.0], false),
    ];
    for (y, phi, psi, adm) in cases {
        let y = vecf(y);
        let got_phi = normal_projection(&a, &p, &cl, &y).unwrap();
        let got_psi = closest_preimage(&a, &p, &cl, &y, &free).unwrap();
        let got_adm = is_admissible(&a, &p, &y).unwrap();
        if !close(&got_phi, phi, 1e-9) || !close(&got_psi, psi, 1e-9) || got_adm != adm {
            failures.push(format!(
                "y=[{}]: phi=[{}] psi=[{}] admissible={got_adm}",
                tropreg::text::join_vector(&y),
                tropreg::text::join_vector(&got_phi),
                tropreg::text::join_vector(&got_psi)
            ));
        }
    }
    if failures.is_empty() {
        outcome(true, "F_P, cycle mean, interior point, both projections")
    } else {
        outcome(false, failures.join("; "))
    }
}

fn oracle_equivalence() -> Outcome {
    let mut rng = Rng::new(4);
    let (mut dominated, mut matched) = (0, 0);
    for k in 0..200u64 {
        let prob = random_problem(&mut rng, 6, 4);
        let b = brute_force_solve(&prob).unwrap().residual_2norm.value();
        let n = multistart_newton_with(&prob, derive_seed(4, k), 10, Execution::Parallel)
            .unwrap()
            .residual_2norm
            .value();
        if b <= n + 1e-12 {
            dominated += 1;
        }
        if n - b <= 1e-6 {
            matched += 1;
        }
    }
    outcome(
        dominated == 200 && matched >= 120,
        format!("brute <= newton on {dominated}/200, newton optimal on {matched}/200"),
    )
}

fn residual_at(a: &MaxPlusMatrix, y: &MaxPlusVector, x0: f64, x1: f64) -> f64 {
    let mut s = 0.0;
    for i in 0..a.rows() {
        let top = (a.get(i, 0).value() + x0).max(a.get(i, 1).value() + x1);
        s += (top - y[i].value()).powi(2);
    }
    s.sqrt()
}

fn grid_certificate() -> Outcome {
    let mut rng = Rng::new(5);
    let mut worst: f64 = 0.0;
    let mut below = 0;
    for _ in 0..20 {
        let n = 1 + rng.below(6) as usize;
        let prob = fixed_problem(&mut rng, n, 2);
        let b = brute_force_solve(&prob).unwrap().residual_2norm.value();
        let mut g = f64::INFINITY;
        for s in 0..=2000 {
            let x0 = -10.0 + s as f64 * 0.01;
            for t in 0..=2000 {
                g = g.min(residual_at(prob.a(), prob.y(), x0, -10.0 + t as f64 * 0.01));
            }
        }
        if b > g + 1e-9 {
            below += 1;
        }
        worst = worst.max((g - b).abs());
    }
    outcome(
        worst <= 0.05 && below == 0,
        format!("largest |grid - brute| = {worst:.3e}"),
    )
}

fn hardness_equivalence() -> Outcome {
    let cat = catalog(2024);
    let (mut disagree, mut covers) = (0, 0);
    for sc in &cat {
        let prob = build_reduction(sc).unwrap();
        let cover = setcover_bruteforce(sc).unwrap();
        covers += cover as usize;
        if descent_exists_binary(prob.a(), prob.y()).unwrap() != cover {
            disagree += 1;
        }
    }
    outcome(
        cat.len() >= 100 && disagree == 0,
        format!(
            "{} instances ({covers} with a cover), {disagree} disagreements",
            cat.len()
        ),
    )
}

/// Seeds (out of 10) where the unregularized fit beats `M` and the regularized
/// estimate is accurate where `M` has evidence and `-inf` where it has none.
fn identification_passes(sigma: f64) -> (usize, usize, usize) {
    let m = example_system();
    let (mut fit, mut accurate, mut both) = (0, 0, 0);
    for seed in 0..10u64 {
        let orbit = simulate(&m, &MaxPlusVector::zeros(4), 200, sigma, seed).unwrap();
        let plain = identify(&orbit, &IdentifyConfig::new(0.0, seed)).unwrap();
        let a_ok = plain.frobenius_residual() <= frobenius_residual(&m, &orbit).unwrap();
        let est = identify(&orbit, &IdentifyConfig::new(10.0, seed))
            .unwrap()
            .estimate;
        let s = evidence_matrix(&m, &orbit).unwrap();
        let b_ok = (0..4).all(|i| {
            (0..4).all(|j| {
                let e = est.get(i, j);
                match s.get(i, j) {
                    0 => e.is_neg_inf(),
                    c if c >= 30 => e.is_finite() && (e.value() - m.get(i, j).value()).abs() <= 1.5,
                    _ => true,
                }
            })
        });
        fit += a_ok as usize;
        accurate += b_ok as usize;
        both += (a_ok && b_ok) as usize;
    }
    (fit, accurate, both)
}

fn system_identification() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for sigma in [1.0, 5.0] {
        let (fit, accurate, both) = identification_passes(sigma);
        pass &= both >= 8;
        parts.push(format!(
            "sigma={sigma}: fit {fit}/10, evidence rule {accurate}/10, both {both}/10"
        ));
    }
    outcome(pass, parts.join("; "))
}

fn irsls_identity() -> Outcome {
    let mut rng = Rng::new(8);
    let mut worst: f64 = 0.0;
    let delta = 1e-4;
    for _ in 0..100 {
        let prob = random_problem(&mut rng, 5, 3);
        let d = prob.a().cols();
        let lambda = rng.uniform(0.0, 20.0);
        let x_prev: Vec<f64> = (0..d).map(|_| rng.uniform(-5.0, 5.0)).collect();
        let x: Vec<f64> = x_prev
            .iter()
            .map(|v| v + delta * rng.uniform(-1.0, 1.0))
            .collect();
        let x_prev = vecf(&x_prev);
        let gap = |x: &MaxPlusVector| {
            augmented_objective(prob.a(), prob.y(), lambda, x, &x_prev).unwrap()
                - regularized_objective(prob.a(), prob.y(), lambda, x)
                    .unwrap()
                    .total()
                    .unwrap()
        };
        worst = worst.max((gap(&vecf(&x)) - gap(&x_prev)).abs());
    }
    outcome(
        worst <= 1e-6,
        format!("largest drift of the constant {worst:.3e}"),
    )
}

fn reduction_correctness() -> Outcome {
    let mut rng = Rng::new(9);
    let (mut infeasible, mut bad) = (0, 0);
    for _ in 0..100 {
        let n = 1 + rng.below(5) as usize;
        let d = 1 + rng.below(4) as usize;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..d)
                    .map(|_| {
                        if rng.unit() < 0.4 {
                            NI
                        } else {
                            rng.uniform(-5.0, 5.0)
                        }
                    })
                    .collect()
            })
            .collect();
        let y: Vec<ExtReal> = (0..n)
            .map(|_| {
                if rng.unit() < 0.25 {
                    ExtReal::NEG_INF
                } else {
                    ExtReal::finite(rng.uniform(-5.0, 5.0))
                }
            })
            .collect();
        let (a, y) = (mat(&rows), MaxPlusVector::new(y));
        // Sample k has finite support k mod 2^d, so every support is visited.
        let sample = |rng: &mut Rng, k: usize, d: usize| -> MaxPlusVector {
            (0..d)
                .map(|j| {
                    let v = rng.uniform(-10.0, 10.0);
                    if (k % (1 << d)) & (1 << j) != 0 {
                        ExtReal::finite(v)
                    } else {
                        ExtReal::NEG_INF
                    }
                })
                .collect()
        };
        let found = (0..100).any(|k| {
            residual(&a, &y, &sample(&mut rng, k, d))
                .unwrap()
                .is_finite()
        });
        let red = reduce(&a, &y).unwrap();
        match red.verdict() {
            Verdict::Infeasible => {
                infeasible += 1;
                bad += found as usize;
            }
            Verdict::Reduced => {
                bad += !found as usize;
                let sub = red.sub_problem();
                let dc = sub.a.cols();
                for k in 0..20 {
                    let x = sample(&mut rng, k, dc);
                    if residual(&a, &y, &red.lift(&x).unwrap()).unwrap()
                        != residual(&sub.a, &sub.y, &x).unwrap()
                    {
                        bad += 1;
                    }
                }
            }
        }
    }
    outcome(
        bad == 0,
        format!("{infeasible} infeasible of 100, {bad} violations"),
    )
}

fn cli(bin: &str, dir: &Path, threads: usize, args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(bin)
        .args(args)
        .arg("--threads")
        .arg(threads.to_string())
        .current_dir(dir)
        .env_remove("TROPREG_THREADS")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr).trim()
        ));
    }
    Ok(out.stdout)
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_tropreg");
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(p.join("A.txt"), "maxplus 3 2\n0 0\n1 0\n0 1\n").unwrap();
    std::fs::write(p.join("y.txt"), "maxplus 3 1\n1\n1\n1\n").unwrap();
    let orbit = cli(
        bin,
        p,
        1,
        &[
            "sysid-simulate",
            "--sigma",
            "1",
            "--steps",
            "200",
            "--seed",
            "3",
        ],
    );
    match orbit {
        Ok(bytes) => std::fs::write(p.join("orbit.txt"), bytes).unwrap(),
        Err(e) => return outcome(false, e),
    }
    let commands: [&[&str]; 9] = [
        &[
            "regress", "--A", "A.txt", "--y", "y.txt", "--solver", "brute", "--seed", "1",
        ],
        &[
            "regress", "--A", "A.txt", "--y", "y.txt", "--solver", "newton", "--seed", "1",
        ],
        &[
            "regress", "--A", "A.txt", "--y", "y.txt", "--solver", "infnorm", "--seed", "1",
        ],
        &[
            "regress", "--A", "A.txt", "--y", "y.txt", "--solver", "newton", "--lambda", "1",
            "--seed", "1",
        ],
        &["patterns", "--A", "A.txt", "--y", "y.txt"],
        &[
            "sysid-simulate",
            "--sigma",
            "5",
            "--steps",
            "50",
            "--seed",
            "7",
        ],
        &[
            "sysid-identify",
            "--orbit",
            "orbit.txt",
            "--lambda",
            "10",
            "--seed",
            "3",
        ],
        &["hardgen", "--seed", "2", "--count", "30"],
        &["bench", "--seed", "6", "--count", "10"],
    ];
    let mut differing = Vec::new();
    for args in commands {
        let runs: Result<Vec<Vec<u8>>, String> =
            [1, 1, 4, 4].iter().map(|&t| cli(bin, p, t, args)).collect();
        match runs {
            Ok(runs) if runs.iter().all(|r| r == &runs[0]) => {}
            Ok(_) => differing.push(args[0].to_string()),
            Err(e) => return outcome(false, e),
        }
    }
    if differing.is_empty() {
        outcome(
            true,
            format!("{} commands x 4 runs identical", commands.len()),
        )
    } else {
        outcome(
            false,
            format!("output differs for {}", differing.join(", ")),
        )
    }
}

fn main() {
    let criteria: [Criterion; 10] = [
        (
            "two-norm worked example",
            Duration::from_secs(1),
            two_norm_example,
        ),
        ("inf-norm worked example", Duration::MAX, inf_norm_example),
        (
            "projection worked example",
            Duration::MAX,
            projection_example,
        ),
        (
            "brute force against multistart Newton",
            Duration::from_secs(60),
            oracle_equivalence,
        ),
        ("grid-search certificate", Duration::MAX, grid_certificate),
        (
            "set-cover reduction",
            Duration::from_secs(30),
            hardness_equivalence,
        ),
        (
            "system identification",
            Duration::from_secs(300),
            system_identification,
        ),
        ("IRSLS surrogate", Duration::MAX, irsls_identity),
        (
            "finite-form reduction",
            Duration::MAX,
            reduction_correctness,
        ),
        ("CLI determinism", Duration::MAX, determinism),
    ];
    let mut failed = Vec::new();
    for (k, (name, budget, check)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let mut out = check();
        let took = t0.elapsed();
        if took > *budget {
            out.pass = false;
            out.detail
                .push_str(&format!("; over the {:.0} s budget", budget.as_secs_f64()));
        }
        let verdict = if out.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {:>2} {verdict} {name}: {} ({:.2} s)",
            k + 1,
            out.detail,
            took.as_secs_f64()
        );
        if !out.pass {
            failed.push(k + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", criteria.len());
    } else {
        println!(
            "acceptance: {} of {} pass; failing: {failed:?}",
            criteria.len() - failed.len(),
            criteria.len()
        );
        std::process::exit(1);
    }
}
