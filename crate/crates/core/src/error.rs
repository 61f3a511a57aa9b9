use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("NaN is not a max-plus scalar")]
    NotANumber,

    #[error("+inf is not a max-plus scalar")]
    PositiveInfinity,

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("Kleene star does not exist: maximum cycle mean {lambda} > 0")]
    PositiveCycleMean { lambda: f64 },

    #[error("pattern is not feasible")]
    InfeasiblePattern,

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("row {row} of the system matrix has no finite entry")]
    AllMinusInfRow { row: usize },

    #[error("problem has no finite residual; nothing to lift")]
    ReductionInfeasible,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("instance too large: {what} = {value} exceeds cap {cap}")]
    SizeCap {
        what: &'static str,
        value: usize,
        cap: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}
