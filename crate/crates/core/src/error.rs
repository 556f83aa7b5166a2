use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{what} exceeds the supported limit ({limit})")]
    TooLarge { what: String, limit: String },
    #[error("division by zero in GF({0})")]
    DivisionByZero(u32),
    #[error("{u}/{v} is not a {base}-adic integer (gcd({v}, {base}) != 1)")]
    NotBAdicInteger { u: String, v: String, base: u32 },
    #[error("base mismatch: {0} vs {1}")]
    BaseMismatch(u32, u32),
    #[error("not a unit in Z_{0}")]
    NotAUnit(u32),
    #[error("arithmetic overflow while {0}")]
    Overflow(&'static str),
    #[error("index {n} exceeds the validity bound {nmax} of the rational surrogate")]
    PrecisionExhausted { n: u64, nmax: u64 },
    #[error("requested row {requested} but only {available} rows are materialized")]
    DepthExceeded { requested: usize, available: usize },
    #[error("no Stirling convention passed the rank self-check: {0}")]
    ConventionRejected(String),
    #[error("matrix file schema error: {0}")]
    Schema(String),
    #[error("entry {value} out of range for GF({q})")]
    EntryOutOfRange { value: u32, q: u32 },
    #[error("expected {expected} points, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("point coordinate {0} outside [0, 1]")]
    OutOfRange(String),
    #[error("the closed-form net bound is only available for bases b > 2 (got {0})")]
    UnsupportedBase(u32),
    #[error("quality parameter t = {t} exceeds m = {m}")]
    InvalidT { t: u32, m: u32 },
    #[error("T-profile covers m <= {have}, need m <= {need}")]
    ProfileTooShort { have: usize, need: usize },
    #[error("invalid sequence spec: {0}")]
    SequenceSpec(String),
    #[error("invalid bijection: {0}")]
    Bijection(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Coarse classification used by front ends to pick exit codes.
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::TooLarge { .. } | Error::DepthExceeded { .. } | Error::PrecisionExhausted { .. } => {
                ErrorClass::Guard
            }
            Error::Schema(_) | Error::SequenceSpec(_) | Error::Bijection(_) | Error::Io(_) => ErrorClass::Config,
            _ => ErrorClass::Math,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Math,
    Guard,
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
