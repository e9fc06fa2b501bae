use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid interval [{a}, {b}]: endpoints must be finite with a < b")]
    InvalidInterval { a: f64, b: f64 },

    #[error("integrand returned a non-finite value at x = {x}")]
    NonFiniteSample { x: f64 },

    #[error("non-finite sample at knot index {index}")]
    NonFiniteKnot { index: usize },

    #[error("contract violation: {0}")]
    ContractViolation(&'static str),

    #[error("invalid tolerances: eps_abs = {eps_abs}, eps_rel = {eps_rel}")]
    InvalidTolerance { eps_abs: f64, eps_rel: f64 },

    #[error("expression error: {0}")]
    Expr(String),
}

pub type Result<T> = std::result::Result<T, Error>;
