use thiserror::Error;

/// Shared error type for the whole kernel.
///
/// `Parse` and `Io` are input-shape problems; everything else is a domain
/// failure (the batch driver maps the two groups to different exit codes).
#[derive(Debug, Error)]
pub enum Error {
    #[error("spec mismatch: {0}")]
    SpecMismatch(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("window violation: {0}")]
    WindowViolation(String),

    #[error("{0} is not exactness-tracked on Laurent windows")]
    LaurentUnsupported(&'static str),

    #[error("not divisible at this truncation: {0}")]
    NotDivisible(String),

    #[error("divisor is not a unit: {0}")]
    NonUnit(String),

    #[error("divergent substitution: {0}")]
    DivergentSubstitution(String),

    #[error("window exhausted: {0}")]
    WindowExhausted(String),

    #[error("sequence too short: {0}")]
    SequenceTooShort(String),

    #[error("class does not apply: {0}")]
    ClassMismatch(String),

    #[error("residual Koszul solve failed: {0}")]
    KoszulSolveFailed(String),

    #[error("norm reduction stalled (defect): {0}")]
    ReductionStalled(String),

    #[error("certificate violated (defect): {0}")]
    CertificateViolation(String),

    #[error("relation out of range: {0}")]
    RelationNorm(String),

    #[error("incompatible windows: {0}")]
    IncompatibleWindows(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }

    /// True for input-shape errors (unparseable files, io trouble), false for
    /// domain errors raised by the kernel itself.
    pub fn is_parse(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::Io(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
