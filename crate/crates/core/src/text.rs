//! Plain-text formats shared by the library and the CLI.
//!
//! Matrices are written as a header line `maxplus n d` followed by `n` lines
//! of `d` whitespace-separated entries, with the literal token `-inf` for the
//! bottom element. Floats are printed in shortest round-trip form (at most 17
//! significant digits), so parse then print then parse is bit-exact.

use crate::error::{Error, Result};
use crate::maxplus::{ExtReal, MaxPlusMatrix, MaxPlusVector};

/// Shortest string that parses back to exactly `x`.
pub fn format_f64(x: f64) -> String {
    if x == f64::NEG_INFINITY {
        return "-inf".to_string();
    }
    if x == f64::INFINITY {
        return "inf".to_string();
    }
    let a = x.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn format_ext(x: ExtReal) -> String {
    format_f64(x.value())
}

/// A whitespace-separated token with its 1-based position.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Token<'a> {
    pub text: &'a str,
    pub line: usize,
    pub column: usize,
}

pub(crate) fn parse_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Non-empty lines, skipping blank lines and `#` comments, with line numbers.
pub(crate) struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last_line: usize,
}

impl<'a> Lines<'a> {
    pub fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate(),
            last_line: 0,
        }
    }

    pub fn next_tokens(&mut self) -> Option<Vec<Token<'a>>> {
        for (idx, line) in self.inner.by_ref() {
            self.last_line = idx + 1;
            let content = line.split('#').next().unwrap_or("");
            let toks = tokenize(content, idx + 1);
            if !toks.is_empty() {
                return Some(toks);
            }
        }
        None
    }

    pub fn expect_tokens(&mut self, what: &str) -> Result<Vec<Token<'a>>> {
        let last = self.last_line;
        self.next_tokens().ok_or_else(|| {
            parse_error(
                last + 1,
                1,
                format!("unexpected end of input, expected {what}"),
            )
        })
    }

    pub fn last_line(&self) -> usize {
        self.last_line
    }
}

pub(crate) fn tokenize(line: &str, line_no: usize) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token {
                    text: &line[s..i],
                    line: line_no,
                    column: s + 1,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &line[s..],
            line: line_no,
            column: s + 1,
        });
    }
    out
}

pub(crate) fn parse_ext(tok: &Token<'_>) -> Result<ExtReal> {
    if tok.text == "-inf" {
        return Ok(ExtReal::NEG_INF);
    }
    let v: f64 = tok.text.parse().map_err(|_| {
        parse_error(
            tok.line,
            tok.column,
            format!("invalid number '{}'", tok.text),
        )
    })?;
    if !v.is_finite() {
        return Err(parse_error(
            tok.line,
            tok.column,
            format!("'{}' is not a finite number or -inf", tok.text),
        ));
    }
    Ok(ExtReal::from_raw(v))
}

pub(crate) fn parse_f64(tok: &Token<'_>) -> Result<f64> {
    tok.text.parse().map_err(|_| {
        parse_error(
            tok.line,
            tok.column,
            format!("invalid number '{}'", tok.text),
        )
    })
}

pub(crate) fn parse_usize(tok: &Token<'_>) -> Result<usize> {
    tok.text.parse().map_err(|_| {
        parse_error(
            tok.line,
            tok.column,
            format!("invalid non-negative integer '{}'", tok.text),
        )
    })
}

pub(crate) fn parse_u64(tok: &Token<'_>) -> Result<u64> {
    tok.text.parse().map_err(|_| {
        parse_error(
            tok.line,
            tok.column,
            format!("invalid integer '{}'", tok.text),
        )
    })
}

pub(crate) fn expect_count(toks: &[Token<'_>], count: usize, what: &str) -> Result<()> {
    if toks.len() == count {
        return Ok(());
    }
    let (line, column) = toks
        .get(count.min(toks.len().saturating_sub(1)))
        .map_or((0, 1), |t| (t.line, t.column));
    Err(parse_error(
        line,
        column,
        format!("expected {count} fields in {what}, found {}", toks.len()),
    ))
}

/// Reads a `maxplus n d` block from `lines`.
pub(crate) fn read_matrix_block(lines: &mut Lines<'_>) -> Result<MaxPlusMatrix> {
    let header = lines.expect_tokens("'maxplus n d' header")?;
    if header[0].text != "maxplus" {
        return Err(parse_error(
            header[0].line,
            header[0].column,
            format!("expected 'maxplus' header, found '{}'", header[0].text),
        ));
    }
    expect_count(&header, 3, "matrix header")?;
    let n = parse_usize(&header[1])?;
    let d = parse_usize(&header[2])?;
    let mut data = Vec::with_capacity(n * d);
    for _ in 0..n {
        let toks = lines.expect_tokens("matrix row")?;
        expect_count(&toks, d, "matrix row")?;
        for t in &toks {
            data.push(parse_ext(t)?);
        }
    }
    MaxPlusMatrix::from_entries(n, d, data)
}

pub fn parse_matrix(text: &str) -> Result<MaxPlusMatrix> {
    let mut lines = Lines::new(text);
    let m = read_matrix_block(&mut lines)?;
    if let Some(extra) = lines.next_tokens() {
        return Err(parse_error(
            extra[0].line,
            extra[0].column,
            "trailing content after matrix",
        ));
    }
    Ok(m)
}

pub fn write_matrix(m: &MaxPlusMatrix) -> String {
    let mut out = format!("maxplus {} {}\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|x| format_ext(*x)).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Parses a vector stored as an `n x 1` (or `1 x n`) matrix.
pub fn parse_vector(text: &str) -> Result<MaxPlusVector> {
    let m = parse_matrix(text)?;
    matrix_to_vector(&m).ok_or_else(|| {
        parse_error(
            1,
            1,
            format!(
                "expected an n x 1 or 1 x n matrix, found {}x{}",
                m.rows(),
                m.cols()
            ),
        )
    })
}

pub(crate) fn matrix_to_vector(m: &MaxPlusMatrix) -> Option<MaxPlusVector> {
    if m.cols() == 1 {
        Some(m.column(0))
    } else if m.rows() == 1 {
        Some(MaxPlusVector::new(m.row(0).to_vec()))
    } else {
        None
    }
}

/// Writes a vector as an `n x 1` matrix.
pub fn write_vector(v: &MaxPlusVector) -> String {
    let mut out = format!("maxplus {} 1\n", v.len());
    for x in v.iter() {
        out.push_str(&format_ext(x));
        out.push('\n');
    }
    out
}

/// Space-separated entries on a single line.
pub fn join_vector(v: &MaxPlusVector) -> String {
    v.iter().map(format_ext).collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn matrix_round_trip_with_neg_inf() {
        let m = MaxPlusMatrix::from_rows(&[
            vec![7.0, 15.0, 10.0, f64::NEG_INFINITY],
            vec![0.1, -0.0, 1e-300, 2.5e17],
        ])
        .unwrap();
        let text = write_matrix(&m);
        assert!(text.starts_with("maxplus 2 4\n7 15 10 -inf\n"));
        let back = parse_matrix(&text).unwrap();
        for (a, b) in m.entries().iter().zip(back.entries()) {
            assert_eq!(a.value().to_bits(), b.value().to_bits());
        }
    }

    #[test]
    fn parse_errors_carry_positions() {
        let err = parse_matrix("maxplus 1 2\n0 abc\n").unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                line: 2,
                column: 3,
                message: "invalid number 'abc'".into()
            }
        );
        assert!(matches!(
            parse_matrix("maxplus 2 2\n0 0\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            parse_matrix("maxplus 1 1\ninf\n"),
            Err(Error::Parse {
                line: 2,
                column: 1,
                ..
            })
        ));
        assert!(matches!(
            parse_matrix("matrix 1 1\n0\n"),
            Err(Error::Parse {
                line: 1,
                column: 1,
                ..
            })
        ));
    }

    #[test]
    fn vector_forms() {
        let v = parse_vector("maxplus 3 1\n1\n-inf\n0\n").unwrap();
        assert_eq!(v.support(), vec![0, 2]);
        let w = parse_vector("maxplus 1 3\n1 -inf 0\n").unwrap();
        assert_eq!(v, w);
        assert_eq!(parse_vector(&write_vector(&v)).unwrap(), v);
    }

    proptest! {
        #[test]
        fn float_format_is_bit_exact(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            prop_assume!(x.is_finite());
            let back: f64 = format_f64(x).parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
            prop_assert!(format_f64(x).len() <= 24);
        }
    }
}
