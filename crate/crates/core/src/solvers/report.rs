use std::fmt;
use std::str::FromStr;

use super::RegressionProblem;
use crate::error::{Error, Result};
use crate::maxplus::{residual_norm, MaxPlusVector, Norm, ResidualValue};
use crate::patterns::Pattern;
use crate::reduction::Verdict;
use crate::regularize::RegularizedObjective;
use crate::text::{format_f64, join_vector, parse_error, tokenize, Token};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolverKind {
    Brute,
    Newton,
    Infnorm,
    Irsls,
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverKind::Brute => "brute",
            SolverKind::Newton => "newton",
            SolverKind::Infnorm => "infnorm",
            SolverKind::Irsls => "irsls",
        })
    }
}

impl FromStr for SolverKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brute" => Ok(SolverKind::Brute),
            "newton" => Ok(SolverKind::Newton),
            "infnorm" => Ok(SolverKind::Infnorm),
            "irsls" => Ok(SolverKind::Irsls),
            other => Err(Error::InvalidConfig(format!("unknown solver '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StepKind {
    Leaf,
    Newton,
    Irsls,
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StepKind::Leaf => "leaf",
            StepKind::Newton => "newton",
            StepKind::Irsls => "irsls",
        })
    }
}

impl FromStr for StepKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "leaf" => Ok(StepKind::Leaf),
            "newton" => Ok(StepKind::Newton),
            "irsls" => Ok(StepKind::Irsls),
            other => Err(Error::InvalidConfig(format!("unknown step kind '{other}'"))),
        }
    }
}

/// One visited leaf (brute force) or iterate (Newton, IRSLS).
///
/// `residual` is the 2-norm distance of the record's candidate to `y`;
/// `best` is the running minimum over the whole trace. Patterns are in the
/// coordinates of the finite-form sub-problem.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub step: u64,
    pub kind: StepKind,
    pub start: Option<usize>,
    pub pattern: Option<Pattern>,
    pub residual: ResidualValue,
    pub best: ResidualValue,
    pub admissible: Option<bool>,
}

impl TraceRecord {
    pub(crate) fn new(kind: StepKind, residual: ResidualValue) -> Self {
        TraceRecord {
            step: 0,
            kind,
            start: None,
            pattern: None,
            residual,
            best: residual,
            admissible: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Regularization {
    pub lambda: f64,
    pub objective: RegularizedObjective,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub solver: SolverKind,
    pub verdict: Verdict,
    pub solution: MaxPlusVector,
    pub residual_2norm: ResidualValue,
    pub residual_infnorm: Option<ResidualValue>,
    pub trace: Vec<TraceRecord>,
    pub vertices_checked: u64,
    pub leaves_projected: u64,
    pub iterations: u64,
    /// Column count of the sub-problem, the width of every trace pattern.
    pub pattern_cols: usize,
    pub seed: Option<u64>,
    pub regularization: Option<Regularization>,
}

impl SolveReport {
    /// Report for `solution` with residuals recomputed on the full problem.
    pub(crate) fn finish(
        prob: &RegressionProblem,
        solver: SolverKind,
        solution: MaxPlusVector,
        mut trace: Vec<TraceRecord>,
    ) -> Result<Self> {
        renumber(&mut trace);
        let residual_2norm = residual_norm(prob.a(), prob.y(), &solution, Norm::Two)?;
        Ok(SolveReport {
            solver,
            verdict: prob.reduction().verdict(),
            solution,
            residual_2norm,
            residual_infnorm: None,
            trace,
            vertices_checked: 0,
            leaves_projected: 0,
            iterations: 0,
            pattern_cols: prob.reduction().kept_cols().len(),
            seed: None,
            regularization: None,
        })
    }

    /// The answer for an instance whose residual is `+inf` everywhere.
    pub(crate) fn infeasible(prob: &RegressionProblem, solver: SolverKind) -> Self {
        SolveReport {
            solver,
            verdict: Verdict::Infeasible,
            solution: MaxPlusVector::neg_inf(prob.cols()),
            residual_2norm: ResidualValue::INFINITE,
            residual_infnorm: None,
            trace: Vec::new(),
            vertices_checked: 0,
            leaves_projected: 0,
            iterations: 0,
            pattern_cols: prob.reduction().kept_cols().len(),
            seed: None,
            regularization: None,
        }
    }

    /// Running minimum of the trace residuals, one entry per record.
    pub fn best_sequence(&self) -> Vec<ResidualValue> {
        self.trace.iter().map(|r| r.best).collect()
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse_report(text)
    }
}

/// Consecutive step numbers and the running best over the records.
pub(crate) fn renumber(trace: &mut [TraceRecord]) {
    let mut best = ResidualValue::INFINITE;
    for (k, rec) in trace.iter_mut().enumerate() {
        rec.step = k as u64;
        let counts = rec.admissible.unwrap_or(true);
        if counts && rec.residual < best {
            best = rec.residual;
        }
        rec.best = best;
    }
}

fn opt<T: fmt::Display>(v: &Option<T>) -> String {
    v.as_ref()
        .map_or_else(|| "-".to_string(), ToString::to_string)
}

impl fmt::Display for SolveReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.trace {
            writeln!(
                f,
                "trace step={} kind={} start={} pattern={} residual={} best={} admissible={}",
                r.step,
                r.kind,
                opt(&r.start),
                opt(&r.pattern),
                r.residual,
                r.best,
                opt(&r.admissible),
            )?;
        }
        writeln!(f, "[summary]")?;
        writeln!(f, "solver={}", self.solver)?;
        writeln!(f, "verdict={}", self.verdict)?;
        writeln!(f, "seed={}", opt(&self.seed))?;
        writeln!(f, "solution={}", join_vector(&self.solution))?;
        writeln!(f, "residual_2norm={}", self.residual_2norm)?;
        writeln!(f, "residual_infnorm={}", opt(&self.residual_infnorm))?;
        writeln!(f, "vertices_checked={}", self.vertices_checked)?;
        writeln!(f, "leaves_projected={}", self.leaves_projected)?;
        writeln!(f, "iterations={}", self.iterations)?;
        writeln!(f, "pattern_cols={}", self.pattern_cols)?;
        match &self.regularization {
            None => {
                writeln!(f, "lambda=-")?;
                writeln!(f, "objective=-")
            }
            Some(reg) => {
                writeln!(f, "lambda={}", format_f64(reg.lambda))?;
                writeln!(f, "objective={}", reg.objective)
            }
        }
    }
}

struct Field<'a> {
    key: &'a str,
    value: &'a str,
    line: usize,
    column: usize,
}

fn split_field<'a>(tok: &Token<'a>) -> Result<Field<'a>> {
    let (key, value) = tok.text.split_once('=').ok_or_else(|| {
        parse_error(
            tok.line,
            tok.column,
            format!("expected key=value, found '{}'", tok.text),
        )
    })?;
    Ok(Field {
        key,
        value,
        line: tok.line,
        column: tok.column + key.len() + 1,
    })
}

fn field_err(f: &Field<'_>, e: Error) -> Error {
    let message = match e {
        Error::Parse { message, .. } => message,
        other => other.to_string(),
    };
    parse_error(f.line, f.column, format!("{}: {message}", f.key))
}

fn value_of<T: FromStr>(f: &Field<'_>) -> Result<T> {
    f.value.parse().map_err(|_| {
        parse_error(
            f.line,
            f.column,
            format!("invalid value '{}' for {}", f.value, f.key),
        )
    })
}

fn optional<T: FromStr>(f: &Field<'_>) -> Result<Option<T>> {
    if f.value == "-" {
        Ok(None)
    } else {
        value_of(f).map(Some)
    }
}

fn residual_of(f: &Field<'_>) -> Result<ResidualValue> {
    if f.value == "inf" {
        return Ok(ResidualValue::INFINITE);
    }
    let v: f64 = value_of(f)?;
    ResidualValue::new(v).map_err(|e| field_err(f, e))
}

fn optional_residual(f: &Field<'_>) -> Result<Option<ResidualValue>> {
    if f.value == "-" {
        Ok(None)
    } else {
        residual_of(f).map(Some)
    }
}

fn verdict_of(f: &Field<'_>) -> Result<Verdict> {
    match f.value {
        "reduced" => Ok(Verdict::Reduced),
        "infeasible" => Ok(Verdict::Infeasible),
        _ => Err(parse_error(
            f.line,
            f.column,
            format!("invalid verdict '{}'", f.value),
        )),
    }
}

fn expect_key<'a>(
    fields: &mut impl Iterator<Item = Result<Field<'a>>>,
    key: &str,
    line: usize,
) -> Result<Field<'a>> {
    match fields.next() {
        Some(Ok(f)) if f.key == key => Ok(f),
        Some(Ok(f)) => Err(parse_error(
            f.line,
            f.column - f.key.len() - 1,
            format!("expected '{key}', found '{}'", f.key),
        )),
        Some(Err(e)) => Err(e),
        None => Err(parse_error(line, 1, format!("missing field '{key}'"))),
    }
}

fn parse_trace_line<'a>(toks: &[Token<'a>], cols: &mut Vec<(usize, Vec<Field<'a>>)>) -> Result<()> {
    let fields = toks[1..]
        .iter()
        .map(split_field)
        .collect::<Result<Vec<_>>>()?;
    cols.push((toks[0].line, fields));
    Ok(())
}

fn build_trace_record(
    line: usize,
    fields: Vec<Field<'_>>,
    pattern_cols: usize,
) -> Result<TraceRecord> {
    let mut it = fields.into_iter().map(Ok);
    let step = value_of(&expect_key(&mut it, "step", line)?)?;
    let f = expect_key(&mut it, "kind", line)?;
    let kind = value_of(&f)?;
    let start = optional(&expect_key(&mut it, "start", line)?)?;
    let f = expect_key(&mut it, "pattern", line)?;
    let pattern = if f.value == "-" {
        None
    } else {
        Some(Pattern::parse(f.value, pattern_cols).map_err(|e| field_err(&f, e))?)
    };
    let residual = residual_of(&expect_key(&mut it, "residual", line)?)?;
    let best = residual_of(&expect_key(&mut it, "best", line)?)?;
    let admissible = optional(&expect_key(&mut it, "admissible", line)?)?;
    if let Some(Ok(extra)) = it.next() {
        return Err(parse_error(
            extra.line,
            extra.column,
            format!("unexpected field '{}'", extra.key),
        ));
    }
    Ok(TraceRecord {
        step,
        kind,
        start,
        pattern,
        residual,
        best,
        admissible,
    })
}

fn parse_report(text: &str) -> Result<SolveReport> {
    let mut pending = Vec::new();
    let mut summary: Vec<Field<'_>> = Vec::new();
    let mut in_summary = false;
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let content = raw.trim_end();
        if content.trim().is_empty() {
            continue;
        }
        if !in_summary {
            let toks = tokenize(content, line_no);
            match toks[0].text {
                "trace" => parse_trace_line(&toks, &mut pending)?,
                "[summary]" => in_summary = true,
                other => {
                    return Err(parse_error(
                        line_no,
                        toks[0].column,
                        format!("unexpected record '{other}'"),
                    ))
                }
            }
        } else {
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| parse_error(line_no, 1, "expected key=value in summary"))?;
            summary.push(Field {
                key,
                value,
                line: line_no,
                column: key.len() + 2,
            });
        }
    }
    if !in_summary {
        return Err(parse_error(last_line + 1, 1, "missing [summary] block"));
    }
    let end = last_line + 1;
    let mut it = summary.into_iter().map(Ok);
    let solver = value_of(&expect_key(&mut it, "solver", end)?)?;
    let verdict = verdict_of(&expect_key(&mut it, "verdict", end)?)?;
    let seed = optional(&expect_key(&mut it, "seed", end)?)?;
    let f = expect_key(&mut it, "solution", end)?;
    let toks = tokenize(f.value, f.line);
    let solution = toks
        .iter()
        .map(|t| crate::text::parse_ext(t))
        .collect::<Result<MaxPlusVector>>()
        .map_err(|e| field_err(&f, e))?;
    let residual_2norm = residual_of(&expect_key(&mut it, "residual_2norm", end)?)?;
    let residual_infnorm = optional_residual(&expect_key(&mut it, "residual_infnorm", end)?)?;
    let vertices_checked = value_of(&expect_key(&mut it, "vertices_checked", end)?)?;
    let leaves_projected = value_of(&expect_key(&mut it, "leaves_projected", end)?)?;
    let iterations = value_of(&expect_key(&mut it, "iterations", end)?)?;
    let pattern_cols = value_of(&expect_key(&mut it, "pattern_cols", end)?)?;
    let lambda: Option<f64> = optional(&expect_key(&mut it, "lambda", end)?)?;
    let f = expect_key(&mut it, "objective", end)?;
    let objective: Option<RegularizedObjective> = if f.value == "-" {
        None
    } else {
        Some(f.value.parse().map_err(|e| field_err(&f, e))?)
    };
    if let Some(Ok(extra)) = it.next() {
        return Err(parse_error(
            extra.line,
            1,
            format!("unexpected field '{}'", extra.key),
        ));
    }
    let regularization = match (lambda, objective) {
        (Some(lambda), Some(objective)) => Some(Regularization { lambda, objective }),
        (None, None) => None,
        _ => {
            return Err(parse_error(
                end - 1,
                1,
                "lambda and objective must both be present or absent",
            ))
        }
    };
    let trace = pending
        .into_iter()
        .map(|(line, fields)| build_trace_record(line, fields, pattern_cols))
        .collect::<Result<Vec<_>>>()?;
    Ok(SolveReport {
        solver,
        verdict,
        solution,
        residual_2norm,
        residual_infnorm,
        trace,
        vertices_checked,
        leaves_projected,
        iterations,
        pattern_cols,
        seed,
        regularization,
    })
}
