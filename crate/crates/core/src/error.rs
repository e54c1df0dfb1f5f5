use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid operator: {0}")]
    InvalidOperator(String),
    #[error("kernel/cokernel basis requested on a point where the range is not closed")]
    NonClosedRange,
    #[error("arrangement has {0} predicates; at most {max} supported", max = crate::region::MAX_PREDICATES)]
    TooManyPredicates(usize),
    #[error("degenerate arrangement: {0}")]
    Degenerate(String),
    #[error("region is not expressible over its predicates: {0}")]
    Inexpressible(String),
    #[error("region is unbounded")]
    Unbounded,
    #[error("truncation of dimension {dim} exceeds the configured maximum {max}")]
    SizeOverflow { dim: usize, max: usize },
    #[error("invalid oracle configuration: {0}")]
    OracleConfig(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
