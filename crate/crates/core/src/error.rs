use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("polynomial has nonzero constant term {0}")]
    ConstantTerm(String),
    #[error("cannot parse polynomial {text:?}: {reason}")]
    PolySyntax { text: String, reason: String },
    #[error("polynomial family is empty")]
    EmptyFamily,
    #[error("duplicate polynomial {0} in family")]
    DuplicateFamilyMember(String),
    #[error("family would contain {count} polynomials, cap is {cap}")]
    FamilyTooLarge { count: String, cap: u64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("index set {0:?} is empty or out of range")]
    BadIndexSet(Vec<usize>),
    #[error("value exceeds bit cap of {cap} bits while evaluating {what}")]
    BitCap { cap: u64, what: String },
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),
    #[error("cannot parse rule {text:?}: {reason}")]
    RuleSyntax { text: String, reason: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
