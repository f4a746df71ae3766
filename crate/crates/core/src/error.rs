use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("invalid degree {0}")]
    InvalidDegree(i64),
    #[error("polynomial {0} is not monic irreducible")]
    NotIrreducible(String),
    #[error("operation undefined at the infinite place")]
    InfinitePlace,
    #[error("generator matrix has zero determinant")]
    ZeroDeterminant,
    #[error("enumeration of {needed} points exceeds budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("window {window} too small, need at least {needed}")]
    WindowTooSmall { window: usize, needed: usize },
    #[error("expression {expr} is not an integer")]
    NonIntegral { expr: String },
    #[error("table cell undefined for {0}")]
    UndefinedCell(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
