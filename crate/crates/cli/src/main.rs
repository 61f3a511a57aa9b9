//! `tropreg`: batch front end for max-plus regression, system identification
//! and the set-cover hardness instances.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "tropreg", version, about = "Max-plus regression toolkit")]
struct Cli {
    /// Worker threads for the parallel solvers.
    #[arg(long, global = true, env = "TROPREG_THREADS")]
    threads: Option<usize>,

    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve min ||A ⊗ x - y||, regularized by IRSLS when --lambda > 0.
    Regress(RegressArgs),
    /// List the feasible patterns of A with their dimension and admissibility.
    Patterns(PatternsArgs),
    /// Simulate a noisy orbit x(n+1) = M ⊗ x(n) + noise.
    SysidSimulate(SimulateArgs),
    /// Estimate the system matrix of an orbit row by row.
    SysidIdentify(IdentifyArgs),
    /// Write set-cover reduction instances.
    Hardgen(HardgenArgs),
    /// Compare brute force and multistart Newton on random instances.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SolverChoice {
    Brute,
    Newton,
    Infnorm,
}

#[derive(Args, Debug)]
struct RegressArgs {
    #[arg(long = "A")]
    a: PathBuf,
    #[arg(long)]
    y: PathBuf,
    #[arg(long, value_enum, default_value = "brute")]
    solver: SolverChoice,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Newton undershoot; given with --patience it replaces the two-phase schedule.
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long, default_value_t = 10)]
    starts: usize,
}

#[derive(Args, Debug)]
struct PatternsArgs {
    #[arg(long = "A")]
    a: PathBuf,
    /// Target for the admissibility column; `-` is printed without one.
    #[arg(long)]
    y: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// System matrix; the built-in four-state example when omitted.
    #[arg(long = "A")]
    a: Option<PathBuf>,
    /// Initial state; zeros when omitted.
    #[arg(long)]
    x0: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    steps: usize,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct IdentifyArgs {
    #[arg(long)]
    orbit: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "newton")]
    solver: SolverChoice,
    #[arg(long, default_value_t = 10)]
    starts: usize,
}

#[derive(Args, Debug)]
struct HardgenArgs {
    /// Seed of the random half of the catalog.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Keep only the first COUNT catalog instances.
    #[arg(long)]
    count: Option<usize>,
    /// Universe size of a single explicit instance (needs --k and --family).
    #[arg(long, requires_all = ["k", "family"])]
    n: Option<usize>,
    #[arg(long, requires = "n")]
    k: Option<usize>,
    /// Sets as 1-based members, e.g. `1,2;2,3;3`.
    #[arg(long, requires = "n")]
    family: Option<String>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    count: usize,
    #[arg(long, default_value_t = 10)]
    starts: usize,
    /// Add a wall-time column; the rest of the table stays deterministic.
    #[arg(long)]
    timing: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
