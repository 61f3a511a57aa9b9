use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;
use tropreg::exec::Execution;
use tropreg::hardness::{catalog, HardInstance, SetCoverInstance};
use tropreg::maxplus::{MaxPlusMatrix, MaxPlusVector};
use tropreg::patterns::{classes_of, domain_interior_point, is_admissible};
use tropreg::regularize::{irsls, BruteInner, InnerSolver, IrslsConfig, NewtonInner};
use tropreg::rng::{derive_seed, Rng};
use tropreg::solvers::{
    brute_force_solve_with, feasible_patterns, infnorm_solve, multistart_newton_with, newton_solve,
    BruteForceConfig, NewtonConfig, RegressionProblem, SolveReport, Starts,
};
use tropreg::sysid::{
    example_system, identify, simulate, IdentificationReport, IdentifyConfig, Orbit, RowSolver,
};
use tropreg::text::{format_f64, parse_matrix, parse_vector};

use crate::{
    BenchArgs, Cli, Command, HardgenArgs, IdentifyArgs, PatternsArgs, RegressArgs, SimulateArgs,
    SolverChoice,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write output: {0}")]
    Write(#[from] std::io::Error),
    #[error("{path}: {source}")]
    Input {
        path: PathBuf,
        source: tropreg::Error,
    },
    #[error(transparent)]
    Solve(#[from] tropreg::Error),
}

impl CliError {
    /// 1 for anything the caller got wrong on the command line, 2 for bad input files.
    pub fn exit_code(&self) -> u8 {
        use tropreg::Error as E;
        match self {
            CliError::Usage(_) | CliError::Read { .. } | CliError::Write(_) => 1,
            CliError::Solve(E::InvalidConfig(_) | E::SizeCap { .. }) => 1,
            CliError::Input { .. } | CliError::Solve(_) => 2,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub fn run(cli: &Cli) -> Result<()> {
    let text = with_threads(cli.threads, || match &cli.command {
        Command::Regress(a) => regress(a),
        Command::Patterns(a) => patterns(a),
        Command::SysidSimulate(a) => sysid_simulate(a),
        Command::SysidIdentify(a) => sysid_identify(a),
        Command::Hardgen(a) => hardgen(a),
        Command::Bench(a) => bench(a),
    })?;
    match &cli.out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

#[cfg(feature = "parallel")]
fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> Result<T> + Send,
) -> Result<T> {
    match threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {n} threads: {e}")))?
            .install(f),
        None => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads<T>(threads: Option<usize>, f: impl FnOnce() -> Result<T>) -> Result<T> {
    if threads == Some(0) {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    f()
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_owned(),
        source,
    })
}

fn load<T>(path: &Path, parse: impl FnOnce(&str) -> tropreg::Result<T>) -> Result<T> {
    parse(&read(path)?).map_err(|source| CliError::Input {
        path: path.to_owned(),
        source,
    })
}

fn problem(a_path: &Path, y_path: &Path) -> Result<RegressionProblem> {
    let a = load(a_path, parse_matrix)?;
    let y = load(y_path, parse_vector)?;
    RegressionProblem::new(a, y).map_err(|source| CliError::Input {
        path: y_path.to_owned(),
        source,
    })
}

fn regress(args: &RegressArgs) -> Result<String> {
    if !(args.lambda.is_finite() && args.lambda >= 0.0) {
        return Err(CliError::Usage(format!(
            "--lambda must be finite and non-negative, got {}",
            args.lambda
        )));
    }
    if args.lambda > 0.0 && args.solver == SolverChoice::Infnorm {
        return Err(CliError::Usage(
            "--lambda applies to the 2-norm solvers only".into(),
        ));
    }
    let prob = problem(&args.a, &args.y)?;
    let mut rep = match args.solver {
        SolverChoice::Brute => brute_force_solve_with(
            &prob,
            &BruteForceConfig {
                execution: Execution::Parallel,
                record_trace: true,
            },
        )?,
        SolverChoice::Infnorm => infnorm_solve(&prob)?,
        SolverChoice::Newton if args.mu.is_some() || args.patience.is_some() => {
            let starts = Starts::Random {
                count: args.starts,
                seed: args.seed,
            };
            newton_solve(
                &prob,
                &NewtonConfig::new(args.mu.unwrap_or(1.0), args.patience.unwrap_or(5), starts)?,
            )?
        }
        SolverChoice::Newton => {
            multistart_newton_with(&prob, args.seed, args.starts, Execution::Parallel)?
        }
    };
    if args.lambda > 0.0 && rep.residual_2norm.is_finite() {
        // The unregularized answer is the IRSLS starting point.
        let inner: &dyn InnerSolver = if args.solver == SolverChoice::Brute {
            &BruteInner
        } else {
            &NewtonInner
        };
        rep = irsls(
            prob.a(),
            prob.y(),
            &rep.solution,
            &IrslsConfig::new(args.lambda),
            inner,
        )?;
    }
    rep.seed = Some(args.seed);
    Ok(rep.to_text())
}

fn patterns(args: &PatternsArgs) -> Result<String> {
    let a = load(&args.a, parse_matrix)?;
    let y = match &args.y {
        Some(p) => Some(load(p, parse_vector)?),
        None => None,
    };
    let found = feasible_patterns(&a, Execution::Parallel)?;
    let mut out = format!(
        "patterns n={} d={} count={}\n",
        a.rows(),
        a.cols(),
        found.len()
    );
    for p in &found {
        // Tied columns move together; columns off the support move freely.
        let dim = classes_of(p, &domain_interior_point(&a, p)?)?.count();
        let adm = match &y {
            Some(y) => is_admissible(&a, p, y)?.to_string(),
            None => "-".into(),
        };
        out.push_str(&format!("pattern={p} dim={dim} admissible={adm}\n"));
    }
    Ok(out)
}

fn sysid_simulate(args: &SimulateArgs) -> Result<String> {
    let m = match &args.a {
        Some(p) => load(p, parse_matrix)?,
        None => example_system(),
    };
    let x0 = match &args.x0 {
        Some(p) => load(p, parse_vector)?,
        None => MaxPlusVector::zeros(m.rows()),
    };
    Ok(simulate(&m, &x0, args.steps, args.sigma, args.seed)?.to_string())
}

fn sysid_identify(args: &IdentifyArgs) -> Result<String> {
    let orbit = load(&args.orbit, Orbit::parse)?;
    let mut cfg = IdentifyConfig::new(args.lambda, args.seed);
    cfg.solver = match args.solver {
        SolverChoice::Brute => RowSolver::Brute,
        SolverChoice::Newton => RowSolver::Newton {
            starts: args.starts,
        },
        SolverChoice::Infnorm => {
            return Err(CliError::Usage(
                "identification uses the 2-norm solvers".into(),
            ))
        }
    };
    let ident = identify(&orbit, &cfg)?;
    Ok(IdentificationReport::new(&orbit, &ident, args.lambda, args.seed)?.to_string())
}

fn hardgen(args: &HardgenArgs) -> Result<String> {
    let instances: Vec<SetCoverInstance> = match (args.n, args.k, &args.family) {
        (Some(n), Some(k), Some(family)) => {
            let family = SetCoverInstance::parse_family(family)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            vec![SetCoverInstance::new(n, family, k).map_err(|e| CliError::Usage(e.to_string()))?]
        }
        _ => {
            let mut all = catalog(args.seed);
            all.truncate(args.count.unwrap_or(usize::MAX));
            all
        }
    };
    let mut out = format!("# hardgen seed={} count={}\n", args.seed, instances.len());
    for sc in instances {
        out.push_str(&HardInstance::generate(sc)?.to_string());
    }
    Ok(out)
}

/// Instance `k` of the bench suite: `n <= 6`, `d <= 4`, entries uniform in `[-5, 5]`.
pub fn bench_instance(seed: u64, k: u64) -> RegressionProblem {
    let mut rng = Rng::new(derive_seed(seed, k));
    let n = 1 + rng.below(6) as usize;
    let d = 1 + rng.below(4) as usize;
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.uniform(-5.0, 5.0)).collect())
        .collect();
    let y: Vec<f64> = (0..n).map(|_| rng.uniform(-5.0, 5.0)).collect();
    let a = MaxPlusMatrix::from_rows(&rows).expect("finite entries");
    RegressionProblem::new(a, MaxPlusVector::from_f64(&y).expect("finite target"))
        .expect("matching sizes")
}

fn bench(args: &BenchArgs) -> Result<String> {
    let mut out = format!(
        "# bench seed={} count={} starts={}\n",
        args.seed, args.count, args.starts
    );
    out.push_str(if args.timing {
        "k n d brute newton gap wall_ms\n"
    } else {
        "k n d brute newton gap\n"
    });
    let mut matched = 0;
    for k in 0..args.count {
        let prob = bench_instance(args.seed, k as u64);
        let t0 = Instant::now();
        let brute = brute_force_solve_with(
            &prob,
            &BruteForceConfig {
                execution: Execution::Parallel,
                record_trace: false,
            },
        )?;
        let newton: SolveReport = multistart_newton_with(
            &prob,
            derive_seed(args.seed, k as u64),
            args.starts,
            Execution::Parallel,
        )?;
        let wall = t0.elapsed();
        let (b, n) = (brute.residual_2norm.value(), newton.residual_2norm.value());
        let gap = n - b;
        if gap <= 1e-6 {
            matched += 1;
        }
        out.push_str(&format!(
            "{k} {} {} {} {} {}",
            prob.a().rows(),
            prob.a().cols(),
            format_f64(b),
            format_f64(n),
            format_f64(gap)
        ));
        if args.timing {
            out.push_str(&format!(" {:.3}", wall.as_secs_f64() * 1e3));
        }
        out.push('\n');
    }
    out.push_str(&format!("# newton_matched={matched}/{}\n", args.count));
    Ok(out)
}
