//! Stochastic max-plus linear dynamics and maximum-likelihood identification.
//!
//! An orbit `x(0), ..., x(N)` of `x(n+1) = M ⊗ x(n) + σ ζ(n)` is stored as a
//! `d x (N+1)` matrix `X`. Under Gaussian noise the likelihood splits into
//! `d` independent max-plus regressions, one per row of the unknown matrix:
//! row `k` regresses `X(k, 1..N)` on the columns `x(0), ..., x(N-1)`.

use std::fmt;

use crate::error::{check_dim, Error, Result};
use crate::exec::{map_ordered, Execution};
use crate::maxplus::{
    first_all_neg_inf_row, mat_vec, require_square, squared_distance, ExtReal, MaxPlusMatrix,
    MaxPlusVector, ResidualValue,
};
use crate::patterns::TIE_TOL;
use crate::regularize::{irsls, BruteInner, InnerSolver, IrslsConfig, NewtonInner};
use crate::rng::{derive_seed, Rng};
use crate::solvers::{
    brute_force_solve_with, multistart_newton_with, BruteForceConfig, RegressionProblem,
    SolveReport,
};
use crate::text::{
    expect_count, format_f64, parse_error, parse_ext, parse_f64, parse_u64, parse_usize,
    read_matrix_block, write_matrix, Lines,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrbitSource {
    Simulated,
    Ingested,
}

/// Observed states, one column per time step.
///
/// Equality compares states, noise level and seed; the source tag is
/// provenance only.
#[derive(Clone, Debug)]
pub struct Orbit {
    states: MaxPlusMatrix,
    sigma: f64,
    seed: u64,
    source: OrbitSource,
}

impl PartialEq for Orbit {
    fn eq(&self, other: &Self) -> bool {
        self.states == other.states
            && self.sigma.to_bits() == other.sigma.to_bits()
            && self.seed == other.seed
    }
}

impl Orbit {
    pub fn new(states: MaxPlusMatrix, sigma: f64, seed: u64, source: OrbitSource) -> Result<Self> {
        if states.cols() < 2 {
            return Err(Error::Precondition(
                "an orbit needs at least one transition".into(),
            ));
        }
        check_sigma(sigma)?;
        Ok(Orbit {
            states,
            sigma,
            seed,
            source,
        })
    }

    pub fn states(&self) -> &MaxPlusMatrix {
        &self.states
    }

    pub fn dim(&self) -> usize {
        self.states.rows()
    }

    /// Number of transitions `N`.
    pub fn transitions(&self) -> usize {
        self.states.cols() - 1
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn source(&self) -> OrbitSource {
        self.source
    }

    pub fn state(&self, n: usize) -> MaxPlusVector {
        self.states.column(n)
    }

    /// `X(:, 0..N-1)^T`, one observed state per row.
    pub fn regressors(&self) -> MaxPlusMatrix {
        let n = self.transitions();
        let rows: Vec<usize> = (0..self.dim()).collect();
        let cols: Vec<usize> = (0..n).collect();
        self.states.select(&rows, &cols).transpose()
    }

    /// `X(k, 1..N)`.
    pub fn targets(&self, k: usize) -> MaxPlusVector {
        (1..=self.transitions())
            .map(|n| self.states.get(k, n))
            .collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = Lines::new(text);
        let header = lines.expect_tokens("'orbit d N sigma seed' header")?;
        if header[0].text != "orbit" {
            return Err(parse_error(
                header[0].line,
                header[0].column,
                format!("expected 'orbit' header, found '{}'", header[0].text),
            ));
        }
        expect_count(&header, 5, "orbit header")?;
        let d = parse_usize(&header[1])?;
        let n = parse_usize(&header[2])?;
        let sigma = parse_f64(&header[3])?;
        if check_sigma(sigma).is_err() {
            return Err(parse_error(
                header[3].line,
                header[3].column,
                "sigma must be finite and non-negative",
            ));
        }
        let seed = parse_u64(&header[4])?;
        if n == 0 {
            return Err(parse_error(
                header[2].line,
                header[2].column,
                "an orbit needs N >= 1",
            ));
        }
        let mut data = Vec::with_capacity(d * (n + 1));
        for _ in 0..d {
            let toks = lines.expect_tokens("orbit row")?;
            expect_count(&toks, n + 1, "orbit row")?;
            for t in &toks {
                data.push(parse_ext(t)?);
            }
        }
        if let Some(extra) = lines.next_tokens() {
            return Err(parse_error(
                extra[0].line,
                extra[0].column,
                "trailing content after orbit",
            ));
        }
        let states = MaxPlusMatrix::from_entries(d, n + 1, data)?;
        Orbit::new(states, sigma, seed, OrbitSource::Ingested)
    }
}

impl fmt::Display for Orbit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "orbit {} {} {} {}",
            self.dim(),
            self.transitions(),
            format_f64(self.sigma),
            self.seed
        )?;
        for i in 0..self.dim() {
            let row: Vec<String> = self.states.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma.is_finite() && sigma >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "sigma must be finite and non-negative, got {sigma}"
        )))
    }
}

/// `x(n+1) = M ⊗ x(n) + σ ζ(n)` with standard normal `ζ` from the seeded stream,
/// drawn coordinate by coordinate within each step.
pub fn simulate(
    m: &MaxPlusMatrix,
    x0: &MaxPlusVector,
    steps: usize,
    sigma: f64,
    seed: u64,
) -> Result<Orbit> {
    require_square(m)?;
    check_dim("initial state", m.rows(), x0.len())?;
    check_sigma(sigma)?;
    if steps == 0 {
        return Err(Error::Precondition(
            "an orbit needs at least one transition".into(),
        ));
    }
    if let Some(row) = first_all_neg_inf_row(m) {
        return Err(Error::AllMinusInfRow { row });
    }
    if !x0.is_all_finite() {
        return Err(Error::Precondition("initial state must be finite".into()));
    }
    let d = m.rows();
    let mut rng = Rng::new(seed);
    let mut columns = vec![x0.clone()];
    for n in 0..steps {
        let next = mat_vec(m, &columns[n])?;
        let noisy: MaxPlusVector = next
            .iter()
            .map(|v| ExtReal::from_raw(v.value() + sigma * rng.standard_normal()))
            .collect();
        columns.push(noisy);
    }
    let mut data = vec![ExtReal::NEG_INF; d * (steps + 1)];
    for (n, col) in columns.iter().enumerate() {
        for i in 0..d {
            data[i * (steps + 1) + n] = col[i];
        }
    }
    Orbit::new(
        MaxPlusMatrix::from_entries(d, steps + 1, data)?,
        sigma,
        seed,
        OrbitSource::Simulated,
    )
}

/// `||A ⊗ X(:, 0..N-1) - X(:, 1..N)||_F^2`; `+inf` on any support mismatch.
pub fn frobenius_residual(a_hat: &MaxPlusMatrix, orbit: &Orbit) -> Result<ResidualValue> {
    check_dim("estimate rows", orbit.dim(), a_hat.rows())?;
    check_dim("estimate columns", orbit.dim(), a_hat.cols())?;
    let mut total = 0.0;
    for n in 0..orbit.transitions() {
        let pred = mat_vec(a_hat, &orbit.state(n))?;
        total += squared_distance(&pred, &orbit.state(n + 1))?;
    }
    Ok(ResidualValue::from_raw(total))
}

/// `(N d / 2) log(2πσ²) + F / (2σ²)` with `F` the Frobenius residual.
pub fn neg_log_likelihood(a_hat: &MaxPlusMatrix, orbit: &Orbit, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    let f = frobenius_residual(a_hat, orbit)?.value();
    let nd = (orbit.transitions() * orbit.dim()) as f64;
    Ok(nd / 2.0 * (2.0 * std::f64::consts::PI * sigma * sigma).ln() + f / (2.0 * sigma * sigma))
}

/// `s_ij`: how many transitions see `a_ij + x(n)_j` attain `(A ⊗ x(n))_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvidenceMatrix {
    d: usize,
    counts: Vec<u64>,
}

impl EvidenceMatrix {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.d + j]
    }

    pub fn row_sum(&self, i: usize) -> u64 {
        self.counts[i * self.d..(i + 1) * self.d].iter().sum()
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        self.counts
            .chunks(self.d.max(1))
            .map(<[u64]>::to_vec)
            .take(self.d)
            .collect()
    }

    pub(crate) fn read_block(lines: &mut Lines<'_>) -> Result<Self> {
        let header = lines.expect_tokens("'evidence d d' header")?;
        if header[0].text != "evidence" {
            return Err(parse_error(
                header[0].line,
                header[0].column,
                format!("expected 'evidence' header, found '{}'", header[0].text),
            ));
        }
        expect_count(&header, 3, "evidence header")?;
        let d = parse_usize(&header[1])?;
        let d2 = parse_usize(&header[2])?;
        if d != d2 {
            return Err(parse_error(
                header[2].line,
                header[2].column,
                "evidence matrix must be square",
            ));
        }
        let mut counts = Vec::with_capacity(d * d);
        for _ in 0..d {
            let toks = lines.expect_tokens("evidence row")?;
            expect_count(&toks, d, "evidence row")?;
            for t in &toks {
                counts.push(parse_u64(t)?);
            }
        }
        Ok(EvidenceMatrix { d, counts })
    }
}

impl fmt::Display for EvidenceMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "evidence {} {}", self.d, self.d)?;
        for row in self.to_rows() {
            let cells: Vec<String> = row.iter().map(u64::to_string).collect();
            writeln!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}

/// Counts over all `N` transitions `n = 0, ..., N-1`.
pub fn evidence_matrix(a_hat: &MaxPlusMatrix, orbit: &Orbit) -> Result<EvidenceMatrix> {
    require_square(a_hat)?;
    check_dim("evidence dimension", orbit.dim(), a_hat.rows())?;
    let d = a_hat.rows();
    let mut counts = vec![0u64; d * d];
    for n in 0..orbit.transitions() {
        let x = orbit.state(n);
        let best = mat_vec(a_hat, &x)?;
        for i in 0..d {
            if best[i].is_neg_inf() {
                continue;
            }
            for j in 0..d {
                let v = a_hat.get(i, j).otimes(x[j]);
                if v.is_finite() && v.value() >= best[i].value() - TIE_TOL {
                    counts[i * d + j] += 1;
                }
            }
        }
    }
    Ok(EvidenceMatrix { d, counts })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowSolver {
    Brute,
    /// Multistart Newton with this many random starts.
    Newton {
        starts: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdentifyConfig {
    pub lambda: f64,
    pub solver: RowSolver,
    pub seed: u64,
    pub execution: Execution,
}

impl IdentifyConfig {
    pub fn new(lambda: f64, seed: u64) -> Self {
        IdentifyConfig {
            lambda,
            solver: RowSolver::Newton { starts: 10 },
            seed,
            execution: Execution::Parallel,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Identification {
    pub estimate: MaxPlusMatrix,
    /// Final solver report per row; row `k`'s squared residual is its share
    /// of the Frobenius residual.
    pub rows: Vec<SolveReport>,
}

impl Identification {
    /// Sum of squared per-row residuals.
    pub fn frobenius_residual(&self) -> ResidualValue {
        let total = self
            .rows
            .iter()
            .map(|r| r.residual_2norm.value().powi(2))
            .sum::<f64>();
        ResidualValue::from_raw(total)
    }
}

fn identify_row(
    orbit: &Orbit,
    regressors: &MaxPlusMatrix,
    k: usize,
    cfg: &IdentifyConfig,
) -> Result<SolveReport> {
    let prob = RegressionProblem::new(regressors.clone(), orbit.targets(k))?;
    let row_seed = derive_seed(cfg.seed, k as u64);
    let (base, inner): (SolveReport, &dyn InnerSolver) = match cfg.solver {
        RowSolver::Brute => (
            brute_force_solve_with(
                &prob,
                &BruteForceConfig {
                    execution: cfg.execution,
                    record_trace: false,
                },
            )?,
            &BruteInner,
        ),
        RowSolver::Newton { starts } => (
            multistart_newton_with(&prob, row_seed, starts, cfg.execution)?,
            &NewtonInner,
        ),
    };
    if cfg.lambda == 0.0 || !base.residual_2norm.is_finite() {
        return Ok(base);
    }
    let mut rep = irsls(
        prob.a(),
        prob.y(),
        &base.solution,
        &IrslsConfig::new(cfg.lambda),
        inner,
    )?;
    rep.seed = base.seed;
    Ok(rep)
}

/// Row-by-row maximum-likelihood estimate, regularized when `λ > 0`.
pub fn identify(orbit: &Orbit, cfg: &IdentifyConfig) -> Result<Identification> {
    if !(cfg.lambda.is_finite() && cfg.lambda >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "lambda must be finite and non-negative, got {}",
            cfg.lambda
        )));
    }
    let d = orbit.dim();
    let regressors = orbit.regressors();
    let ks: Vec<usize> = (0..d).collect();
    let rows = map_ordered(cfg.execution, &ks, |&k| {
        identify_row(orbit, &regressors, k, cfg)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut data = Vec::with_capacity(d * d);
    for rep in &rows {
        data.extend_from_slice(rep.solution.entries());
    }
    Ok(Identification {
        estimate: MaxPlusMatrix::from_entries(d, d, data)?,
        rows,
    })
}

/// What `sysid-identify` writes: estimate, its evidence on the orbit, fit and seed.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentificationReport {
    pub estimate: MaxPlusMatrix,
    pub evidence: EvidenceMatrix,
    pub frobenius_residual: ResidualValue,
    pub lambda: f64,
    pub seed: u64,
}

impl IdentificationReport {
    pub fn new(orbit: &Orbit, ident: &Identification, lambda: f64, seed: u64) -> Result<Self> {
        Ok(IdentificationReport {
            evidence: evidence_matrix(&ident.estimate, orbit)?,
            frobenius_residual: frobenius_residual(&ident.estimate, orbit)?,
            estimate: ident.estimate.clone(),
            lambda,
            seed,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = Lines::new(text);
        let estimate = read_matrix_block(&mut lines)?;
        let evidence = EvidenceMatrix::read_block(&mut lines)?;
        let mut field = |key: &str| -> Result<(String, usize)> {
            let toks = lines.expect_tokens(key)?;
            expect_count(&toks, 1, key)?;
            let t = toks[0];
            match t.text.split_once('=') {
                Some((k, v)) if k == key => Ok((v.to_string(), t.line)),
                _ => Err(parse_error(
                    t.line,
                    t.column,
                    format!("expected '{key}=...'"),
                )),
            }
        };
        let (fr, line) = field("frobenius_residual")?;
        let frobenius_residual = if fr == "inf" {
            ResidualValue::INFINITE
        } else {
            fr.parse::<f64>()
                .ok()
                .and_then(|v| ResidualValue::new(v).ok())
                .ok_or_else(|| parse_error(line, 20, format!("invalid residual '{fr}'")))?
        };
        let (lam, line) = field("lambda")?;
        let lambda = lam
            .parse()
            .map_err(|_| parse_error(line, 8, format!("invalid lambda '{lam}'")))?;
        let (seed, line) = field("seed")?;
        let seed = seed
            .parse()
            .map_err(|_| parse_error(line, 6, format!("invalid seed '{seed}'")))?;
        Ok(IdentificationReport {
            estimate,
            evidence,
            frobenius_residual,
            lambda,
            seed,
        })
    }
}

impl fmt::Display for IdentificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&write_matrix(&self.estimate))?;
        write!(f, "{}", self.evidence)?;
        writeln!(f, "frobenius_residual={}", self.frobenius_residual)?;
        writeln!(f, "lambda={}", format_f64(self.lambda))?;
        writeln!(f, "seed={}", self.seed)
    }
}

/// The four-state example system used throughout the identification tests.
pub fn example_system() -> MaxPlusMatrix {
    const NI: f64 = f64::NEG_INFINITY;
    MaxPlusMatrix::from_rows(&[
        vec![7.0, 15.0, 10.0, NI],
        vec![14.0, NI, 11.0, 11.0],
        vec![14.0, NI, NI, NI],
        vec![15.0, 8.0, 7.0, 9.0],
    ])
    .expect("static matrix")
}
