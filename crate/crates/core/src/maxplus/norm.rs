//! Extended p-norm distances between vectors that may contain `-inf`.
//!
//! Two vectors are at finite distance only when their supports coincide; the
//! distance is then the ordinary p-norm of the difference of their finite
//! parts. Mismatched supports are at distance `+inf`, equal empty supports at
//! distance 0.

use std::fmt;
use std::str::FromStr;

use super::matrix::{mat_vec, MaxPlusMatrix, MaxPlusVector};
use super::scalar::ResidualValue;
use crate::error::{check_dim, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Norm {
    One,
    Two,
    Inf,
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Norm::One => "1",
            Norm::Two => "2",
            Norm::Inf => "inf",
        })
    }
}

impl FromStr for Norm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(Norm::One),
            "2" => Ok(Norm::Two),
            "inf" => Ok(Norm::Inf),
            other => Err(Error::InvalidConfig(format!("unknown norm '{other}'"))),
        }
    }
}

/// Finite coordinate differences `x_i - y_i`, or `None` on support mismatch.
fn matched_differences<'a>(
    x: &'a MaxPlusVector,
    y: &'a MaxPlusVector,
) -> Option<impl Iterator<Item = f64> + 'a> {
    let mismatch = x
        .iter()
        .zip(y.iter())
        .any(|(a, b)| a.is_finite() != b.is_finite());
    if mismatch {
        return None;
    }
    Some(
        x.iter()
            .zip(y.iter())
            .filter(|(a, _)| a.is_finite())
            .map(|(a, b)| a.value() - b.value()),
    )
}

pub fn pnorm_distance(x: &MaxPlusVector, y: &MaxPlusVector, p: Norm) -> Result<ResidualValue> {
    check_dim("pnorm_distance", x.len(), y.len())?;
    let Some(diffs) = matched_differences(x, y) else {
        return Ok(ResidualValue::INFINITE);
    };
    let value = match p {
        Norm::One => diffs.map(f64::abs).sum(),
        Norm::Two => diffs.map(|d| d * d).sum::<f64>().sqrt(),
        Norm::Inf => diffs.map(f64::abs).fold(0.0, f64::max),
    };
    Ok(ResidualValue::from_raw(value))
}

/// Squared extended 2-norm distance; `+inf` on support mismatch.
pub fn squared_distance(x: &MaxPlusVector, y: &MaxPlusVector) -> Result<f64> {
    check_dim("squared_distance", x.len(), y.len())?;
    Ok(match matched_differences(x, y) {
        Some(diffs) => diffs.map(|d| d * d).sum(),
        None => f64::INFINITY,
    })
}

/// `R(x) = ||A ⊗ x - y||_2^2 / 2`.
pub fn residual(a: &MaxPlusMatrix, y: &MaxPlusVector, x: &MaxPlusVector) -> Result<ResidualValue> {
    check_dim("residual rows", a.rows(), y.len())?;
    let ax = mat_vec(a, x)?;
    Ok(ResidualValue::from_raw(squared_distance(&ax, y)? / 2.0))
}

/// `||A ⊗ x - y||` in the requested norm.
pub fn residual_norm(
    a: &MaxPlusMatrix,
    y: &MaxPlusVector,
    x: &MaxPlusVector,
    p: Norm,
) -> Result<ResidualValue> {
    check_dim("residual rows", a.rows(), y.len())?;
    pnorm_distance(&mat_vec(a, x)?, y, p)
}
