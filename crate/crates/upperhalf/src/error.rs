use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Parse failure with the byte offset of the offending input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at offset {}: {}", self.position, self.message)
    }
}

impl core::error::Error for ParseError {}

/// Failure modes of the library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A point violated the upper half-space constraints.
    InvalidPoint { reason: &'static str },
    /// Dimension below 2 requested.
    InvalidDimension { n: usize },
    /// Two operands disagree on the dimension.
    DimensionMismatch { expected: usize, found: usize },
    /// A parameter array has the wrong length.
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    /// Division by a zero value slot.
    DivisionByZero,
    /// A function was evaluated outside its domain (log/sqrt of a
    /// non-positive value, negative integer power of zero).
    OutOfDomain { function: &'static str, value: f64 },
    /// An evaluation produced NaN or an infinity.
    NonFinite { context: &'static str },
    /// Expression text did not parse.
    Parse(ParseError),
    /// The quadratic polynomial under the conformal factor vanishes somewhere
    /// on the upper half-space, so the derived factor does not exist.
    PotentialHasZero,
    /// The quadratic polynomial under the conformal factor is identically
    /// zero (all of a, b, c vanish).
    PotentialIdenticallyZero,
    /// lambda equals -(n-1)(1-n rho); the conformal factor is unconstrained
    /// there and cannot be derived.
    DegenerateLambda { lambda: f64 },
    /// A grid specification is unusable.
    InvalidGrid { reason: String },
    /// A step size is non-positive or non-finite.
    InvalidStep { value: f64 },
    /// An integration span requires more steps than the sample buffer allows.
    TooManySteps { steps: f64, limit: usize },
    /// Evaluation failed at a specific grid node.
    NodeEvaluation { coords: Vec<f64>, source: Box<Error> },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidPoint { reason } => write!(f, "invalid point: {reason}"),
            Error::InvalidDimension { n } => {
                write!(f, "dimension must be at least 2, got {n}")
            }
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::LengthMismatch {
                what,
                expected,
                found,
            } => write!(f, "{what}: expected length {expected}, found {found}"),
            Error::DivisionByZero => write!(f, "division by zero"),
            Error::OutOfDomain { function, value } => {
                write!(f, "{function} is undefined at {value}")
            }
            Error::NonFinite { context } => {
                write!(f, "{context} produced a non-finite value")
            }
            Error::Parse(e) => write!(f, "{e}"),
            Error::PotentialHasZero => write!(
                f,
                "the denominator polynomial has zeros on the upper half-space; \
                 the derived conformal factor requires it to be zero-free"
            ),
            Error::PotentialIdenticallyZero => write!(
                f,
                "the denominator polynomial is identically zero (a = b = c = 0)"
            ),
            Error::DegenerateLambda { lambda } => write!(
                f,
                "lambda = {lambda} equals -(n-1)(1-n*rho); the conformal factor \
                 is unconstrained at this value and cannot be derived"
            ),
            Error::InvalidGrid { reason } => write!(f, "invalid grid: {reason}"),
            Error::InvalidStep { value } => {
                write!(f, "step must be positive and finite, got {value}")
            }
            Error::TooManySteps { steps, limit } => {
                write!(
                    f,
                    "integration span needs about {steps:.0} steps, limit is {limit}"
                )
            }
            Error::NodeEvaluation { coords, source } => {
                write!(f, "evaluation failed at grid node (")?;
                for (i, c) in coords.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, "): {source}")
            }
        }
    }
}

impl core::error::Error for Error {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            Error::NodeEvaluation { source, .. } => Some(source.as_ref()),
            Error::Parse(e) => Some(e),
            _ => None,
        }
    }
}

impl From<ParseError> for Error {
    fn from(e: ParseError) -> Self {
        Error::Parse(e)
    }
}
