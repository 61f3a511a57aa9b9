//! Scalars of the max-plus semiring and nonnegative residual values.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// An element of `R ∪ {-inf}`.
///
/// Stored as an `f64` whose only non-finite value is `f64::NEG_INFINITY`.
/// NaN and `+inf` are rejected at construction, so the float order is total
/// and `Ord` can be implemented on it.
#[derive(Clone, Copy, PartialEq, Default)]
#[repr(transparent)]
pub struct ExtReal(f64);

impl ExtReal {
    /// The bottom element, neutral for `⊕` and absorbing for `⊗`.
    pub const NEG_INF: ExtReal = ExtReal(f64::NEG_INFINITY);
    /// The unit for `⊗`.
    pub const ZERO: ExtReal = ExtReal(0.0);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() {
            Err(Error::NotANumber)
        } else if value == f64::INFINITY {
            Err(Error::PositiveInfinity)
        } else {
            Ok(ExtReal(value))
        }
    }

    /// Finite value. Panics on NaN or infinities; intended for literals.
    pub fn finite(value: f64) -> Self {
        assert!(value.is_finite(), "ExtReal::finite({value})");
        ExtReal(value)
    }

    /// Internal constructor for values already known to satisfy the invariant.
    #[inline]
    pub(crate) fn from_raw(value: f64) -> Self {
        debug_assert!(!value.is_nan() && value != f64::INFINITY);
        ExtReal(value)
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.0 != f64::NEG_INFINITY
    }

    #[inline]
    pub fn is_neg_inf(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    /// `a ⊕ b = max(a, b)`.
    #[inline]
    pub fn oplus(self, rhs: Self) -> Self {
        if rhs.0 > self.0 {
            rhs
        } else {
            self
        }
    }

    /// `a ⊗ b = a + b`, with `-inf` absorbing.
    #[inline]
    pub fn otimes(self, rhs: Self) -> Self {
        if self.is_neg_inf() || rhs.is_neg_inf() {
            Self::NEG_INF
        } else {
            ExtReal(self.0 + rhs.0)
        }
    }
}

impl TryFrom<f64> for ExtReal {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        ExtReal::new(value)
    }
}

impl From<ExtReal> for f64 {
    fn from(x: ExtReal) -> f64 {
        x.0
    }
}

impl Eq for ExtReal {}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        // NaN never gets in; -0.0 and 0.0 stay equal, as under `==`.
        self.0.partial_cmp(&other.0).expect("no NaN")
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_neg_inf() {
            f.write_str("-inf")
        } else {
            f.write_str(&crate::text::format_f64(self.0))
        }
    }
}

/// A distance or residual in `[0, +inf]`.
#[derive(Clone, Copy, PartialEq)]
pub struct ResidualValue(f64);

impl ResidualValue {
    pub const ZERO: ResidualValue = ResidualValue(0.0);
    pub const INFINITE: ResidualValue = ResidualValue(f64::INFINITY);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() {
            Err(Error::NotANumber)
        } else if value < 0.0 {
            Err(Error::Precondition(format!("negative residual {value}")))
        } else {
            Ok(ResidualValue(value))
        }
    }

    #[inline]
    pub(crate) fn from_raw(value: f64) -> Self {
        debug_assert!(value >= 0.0);
        ResidualValue(value)
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }
}

impl Eq for ResidualValue {}

impl Ord for ResidualValue {
    fn cmp(&self, other: &Self) -> Ordering {
        // NaN never gets in; -0.0 and 0.0 stay equal, as under `==`.
        self.0.partial_cmp(&other.0).expect("no NaN")
    }
}

impl PartialOrd for ResidualValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for ResidualValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for ResidualValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            f.write_str("inf")
        } else {
            f.write_str(&crate::text::format_f64(self.0))
        }
    }
}
