use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid truncation set: {0}")]
    InvalidTruncationSet(String),
    #[error("{n} is not a member of {set}")]
    NotAMember { n: u64, set: String },
    #[error("truncation sets {0} and {1} are not coprime")]
    NotCoprime(String, String),
    #[error("{0} is not a divisor-stable subset of {1}")]
    NotASubset(String, String),
    #[error("ring mismatch: {0}")]
    RingMismatch(String),
    #[error("element is not divisible by {0}")]
    NotDivisible(String),
    #[error("quotient by {0} is not unique (ring has torsion)")]
    NonUniqueQuotient(String),
    #[error("constant term cannot be evaluated in non-unital ring {0}")]
    ConstantTermNonUnital(String),
    #[error("integrality violation: {0}")]
    IntegralityViolation(String),
    #[error("tuple is not in the ghost image: {0}")]
    NotInGhostImage(String),
    #[error("tuple is not in the image of the ghost map: {0}")]
    NotInImage(String),
    #[error("p = {p} divides q = {q}")]
    PDividesQ { p: u64, q: String },
    #[error("law is not in normal form: {0}")]
    NotInNormalForm(String),
    #[error("ring {0} is not reduced")]
    NotReduced(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("certification failed: {0}")]
    CertificationFailed(String),
}

impl Error {
    pub(crate) fn mismatch(what: impl Into<String>) -> Self {
        Error::RingMismatch(what.into())
    }
}
