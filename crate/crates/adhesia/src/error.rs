//! Crate-wide error type with stable machine-readable codes.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("codomain mismatch: {0}")]
    CodomainMismatch(String),

    #[error("function is not injective: {0}")]
    NotInjective(String),

    #[error("unknown atom `{0}`")]
    UnknownAtom(String),

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("term is not an element of the functor: {0}")]
    NotAnElement(String),

    #[error("pair is not in the functor pullback: {0}")]
    NotInPullback(String),

    #[error("cospan leg is not injective: {0}")]
    NonInjectiveLeg(String),

    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),

    #[error("morphism is not in the class M (not injective): {0}")]
    NotInM(String),

    #[error("structure maps disagree on a glued element: {0}")]
    StructureClash(String),

    #[error("malformed cube: {0}")]
    MalformedCube(String),

    #[error("gluing condition violated: {0}")]
    GluingViolation(String),

    #[error("no such match: {0}")]
    NoSuchMatch(String),

    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),

    #[error("malformed input: {0}")]
    Malformed(String),
}

impl Error {
    /// Stable error code for CLI output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DomainMismatch(_) => "domain-mismatch",
            Error::CodomainMismatch(_) => "codomain-mismatch",
            Error::NotInjective(_) => "not-injective",
            Error::UnknownAtom(_) => "unknown-atom",
            Error::Parse { .. } => "parse-error",
            Error::NotAnElement(_) => "not-an-element",
            Error::NotInPullback(_) => "not-in-pullback",
            Error::NonInjectiveLeg(_) => "non-injective-leg",
            Error::SignatureMismatch(_) => "signature-mismatch",
            Error::NotInM(_) => "not-in-m",
            Error::StructureClash(_) => "structure-clash",
            Error::MalformedCube(_) => "malformed-cube",
            Error::GluingViolation(_) => "gluing-violation",
            Error::NoSuchMatch(_) => "no-such-match",
            Error::UnknownFixture(_) => "unknown-fixture",
            Error::Malformed(_) => "malformed",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
