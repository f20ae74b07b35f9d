use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("polynomial is not irreducible: {0}")]
    NotIrreducible(String),
    #[error("cubic does not split in the given extension")]
    NoSplit,
    #[error("singular or degenerate input: {0}")]
    Degenerate(String),
    #[error("element is not a unit")]
    NotUnit,
    #[error("division by zero")]
    DivisionByZero,
    #[error("not a square: {0}")]
    NotSquare(String),
    #[error("congruence check failed: {0}")]
    Congruence(String),
    #[error("root labelling ambiguous: {0}")]
    RootLabel(String),
    #[error("no convergence after {0} steps")]
    NoConvergence(usize),
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("enumeration guard exceeded: {0}")]
    Guard(String),
    #[error("degree guess {0} rejected")]
    DegreeRejected(usize),
    #[error("degree search exhausted")]
    DegreeSearchFailed,
    #[error("recognition failed: {0}")]
    Recognition(String),
    #[error("undecidable: {0}")]
    Undecidable(String),
    #[error("inconsistent data: {0}")]
    Inconsistent(String),
    #[error("verification mismatch: {0}")]
    Verification(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{stage}: {inner}")]
    Stage { stage: &'static str, inner: Box<Error> },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub fn at(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            inner: Box::new(self),
        }
    }

    /// The innermost error, skipping stage tags.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { inner, .. } => inner.root(),
            e => e,
        }
    }
}
