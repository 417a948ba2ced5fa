use thiserror::Error;

use crate::polyring::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("the zero polynomial is not allowed here")]
    ZeroPolynomial,
    #[error("polynomial is not homogeneous")]
    NotHomogeneous,
    #[error("point is not admissible: the form vanishes there")]
    NotAdmissible,
    #[error("direction is the zero vector")]
    ZeroDirection,
    #[error("expected {expected} coordinates, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("division leaves a nonzero remainder")]
    InexactDivision,
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("negative exponent {0}")]
    NegativeExponent(i64),
    #[error("polynomial is not monic in the distinguished variable")]
    NotMonic,
    #[error("degree {found} is too small, at least {needed} required")]
    DegreeTooSmall { needed: u32, found: u32 },
    #[error("both resultant arguments are constant")]
    ConstantResultantArguments,
    #[error("resultant of real and imaginary parts vanishes identically; the form has a repeated factor in t")]
    DegenerateResultant,
    #[error("expected a linear form")]
    NotLinear,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("numerical failure: {0}")]
    NumericFailure(String),
}
