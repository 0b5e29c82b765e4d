//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse {
        line: usize,
        col: usize,
        msg: String,
    },

    #[error("undeclared variable `{0}`")]
    UndeclaredVariable(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite evaluation: {0}")]
    NonFinite(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("point outside domain: {0}")]
    OutsideDomain(String),

    #[error("empty or degenerate polytope: {0}")]
    DegeneratePolytope(String),

    #[error("step size underflow at t = {t:.6e} (stiff system?)")]
    StepSizeUnderflow { t: f64 },

    #[error("non-finite state at t = {t:.6e}")]
    NonFiniteState { t: f64 },

    #[error(
        "Newton iteration failed to converge after {iters} iterations (residual {residual:.3e})"
    )]
    NewtonNoConvergence { iters: usize, residual: f64 },

    #[error("characteristic absent at u = {u:?}: {msg}")]
    CharacteristicAbsent { u: Vec<f64>, msg: String },

    #[error("domain too thin to sample ordered pairs: found {found} of {wanted} requested")]
    DomainTooThin { found: usize, wanted: usize },

    #[error("order mismatch: {0}")]
    OrderMismatch(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("unknown builtin model `{0}`")]
    UnknownBuiltin(String),

    #[error("trajectory unbounded: {0}")]
    Unbounded(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
