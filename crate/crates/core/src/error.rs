use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("vocabulary: {0}")]
    Vocabulary(String),
    #[error("tolerance: {0}")]
    Tolerance(String),
    #[error("no value given for tolerance index {0}")]
    MissingTolerance(u32),
    #[error("malformed number `{0}`")]
    Number(String),
    #[error("{line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("not allowed in a knowledge base: {0}")]
    Restriction(String),
    #[error("formula is not essentially propositional: {0}")]
    NotPropositional(String),
    #[error("non-unary symbol `{0}` where only unary predicates are allowed")]
    NonUnary(String),
    #[error("unsupported tolerance placement: {0}")]
    TolerancePlacement(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    /// True for errors caused by the numerical backends or resource limits rather
    /// than by the input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(self, Error::Capacity(_) | Error::Solver(_))
    }
}
