use thiserror::Error;

use crate::exprs::ExprError;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A precondition on shapes, orders, or ranges was violated.
    #[error("contract violation: {0}")]
    Contract(String),
    /// Expression parsing or evaluation failed.
    #[error(transparent)]
    Expr(#[from] ExprError),
    /// The integrator produced non-finite values.
    #[error("integration diverged at node {node} (t = {t})")]
    Divergence { node: usize, t: f64 },
    /// The discrete problem is not uniquely solvable.
    #[error("problem is defective: dim ker = {dim_ker}, dim coker = {dim_coker}")]
    Defective { dim_ker: usize, dim_coker: usize },
    /// The requested configuration is outside what is implemented.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Contract(msg.into()))
}
