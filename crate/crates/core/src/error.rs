use thiserror::Error;

/// Errors raised across the library. The CLI maps each variant to an exit code.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid position {0}")]
    InvalidPosition(String),
    #[error("sort mismatch: expected {expected}, found {found}")]
    SortMismatch { expected: String, found: String },
    #[error("arity mismatch for {op}: expected {expected}, found {found}")]
    ArityMismatch { op: String, expected: usize, found: usize },
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("object mismatch: {0}")]
    ObjectMismatch(String),
    #[error("step budget of {budget} exceeded: {context}")]
    BudgetExceeded { budget: usize, context: String },
    #[error("completeness not certified: {0}")]
    CompletenessNotCertified(String),
    #[error("unsupported coefficient modulus {0}: must be 0 or a prime dividing the degree")]
    UnsupportedDegree(u64),
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}: undeclared name {name}")]
    UndeclaredName { line: usize, name: String },
    #[error("{line}: duplicate name {name}")]
    DuplicateName { line: usize, name: String },
    #[error("rule {0}: left-hand side is a variable")]
    VariableOnLhsRoot(String),
    #[error("rule {rule}: right-hand side variable {var} does not occur on the left")]
    RhsVariableNotInLhs { rule: String, var: String },
    #[error("trichotomy violation at {0}")]
    TrichotomyViolation(String),
    #[error("{line}: {inner}")]
    AtLine { line: usize, inner: Box<Error> },
    #[error("insufficient dimension: need matrices through dimension {0}")]
    InsufficientDimension(usize),
}

impl Error {
    /// The underlying error, without line information.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtLine { inner, .. } => inner.root(),
            e => e,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
