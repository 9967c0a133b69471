use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("a law needs at least one atom")]
    Empty,
    #[error("atom value {0} is not positive")]
    NonPositiveValue(f64),
    #[error("atom mass {0} is not positive")]
    NonPositiveMass(f64),
    #[error("masses sum to {sum}, which is not within {tolerance:e} of 1")]
    MassSumOutOfTolerance { sum: f64, tolerance: f64 },
    #[error("non-finite input {0}")]
    NonFinite(f64),
    #[error("moment of order {order} is not finite")]
    Overflow { order: f64 },

    #[error("weights must be non-negative (p = {p}, q = {q})")]
    NegativeWeight { p: f64, q: f64 },
    #[error("{check} takes {expected} parameters, got {got}")]
    ArityMismatch {
        check: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("orders must satisfy r < s < t (got {r}, {s}, {t})")]
    OrderViolation { r: f64, s: f64, t: f64 },

    #[error("probability {0} is not positive")]
    NonPositiveProbability(f64),
    #[error("distribution has {0} entries; both sides of a pair need the same length")]
    LengthMismatch(usize),
    #[error("measure `{0}` needs a parameter")]
    MissingParam(&'static str),
    #[error("order alpha = 1 is singular for this measure")]
    AlphaOne,
    #[error("divergence kernel is not finite at ratio {0}")]
    NonFiniteKernel(f64),

    #[error("order {0} is singular for exact evaluation")]
    SingularOrder(i64),
    #[error("order {0} is not an integer")]
    NonIntegerMidpoint(f64),
    #[error("masses of a rational law must sum to exactly 1 (got {0})")]
    InexactMassSum(String),
    #[error("cannot certify: {0}")]
    NotCertifiable(String),

    #[error("invalid sampler configuration: {0}")]
    InvalidConfig(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
