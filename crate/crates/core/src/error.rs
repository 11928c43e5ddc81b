use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid rational literal {0:?}")]
    ParseRational(String),
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("invalid rule: {0}")]
    InvalidRule(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid formula: {0}")]
    InvalidFormula(String),
    #[error("dimacs parse error at line {line}: {msg}")]
    Dimacs { line: usize, msg: String },
    #[error("{0}")]
    Format(String),
    #[error("enumeration bound exceeded: {needed} input bits, bound is {bound}")]
    EnumerationBound { needed: usize, bound: usize },
    #[error("regions are not separated")]
    NotSeparated,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
