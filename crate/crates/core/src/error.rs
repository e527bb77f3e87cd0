use thiserror::Error;

use crate::model::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid specification: {}", join_violations(.0))]
    InvalidSpec(Vec<Violation>),

    #[error("order error: {0}")]
    Order(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("length {len} is not a multiple of period {period}")]
    DimensionMismatch { len: usize, period: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("singular information matrix (condition number {condition:.3e})")]
    SingularInformation { condition: f64 },

    #[error("all {n_starts} starting points failed to produce a finite objective")]
    AllStartsFailed { n_starts: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("{excluded} of {total} replications failed (more than 5%)")]
    ExcessiveExclusions { excluded: usize, total: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.message.as_str()).collect::<Vec<_>>().join("; ")
}
