use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("index {index} out of range (rank {rank})")]
    IndexOutOfRange { index: usize, rank: usize },
    #[error("integrality violation: {0}")]
    IntegralityViolation(String),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("wrong atom kind: {0}")]
    WrongAtomKind(String),
    #[error("element is not in the required triangular part: {0}")]
    WrongTriangularPart(String),
    #[error("bad prime {p} for {kind}")]
    BadPrime { kind: String, p: u32 },
    #[error("element is not in the torus part")]
    NotTorusPart,
    #[error("dual polynomial side does not match the hyperalgebra element")]
    SideMismatch,
    #[error("no equivariant grading found up to degree {0}")]
    NoEquivariantGrading(u32),
    #[error("grading has not been built")]
    GradingMissing,
    #[error("module dimension {dim} exceeds size bound {bound}")]
    SizeBound { dim: u64, bound: u64 },
    #[error("closure failure: {0}")]
    ClosureFailure(String),
    #[error("invariant form has {0}-dimensional solution space, expected 1")]
    NonUniqueForm(usize),
    #[error("truncation too small: {0}")]
    TruncationTooSmall(String),
    #[error("truncation exceeded: {0}")]
    TruncationExceeded(String),
    #[error("weight twists do not match: {0}")]
    LambdaMismatch(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
