use thiserror::Error;

use crate::expr::ExprError;
use crate::linalg::LinalgError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("propagation diverged at t = {t} (entry magnitude exceeded 1e300)")]
    Divergence { t: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("periodic problem has no solution (compatibility residual {residual:.3e})")]
    Incompatible { residual: f64 },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("numerical consistency check failed: {0}")]
    NumericalConsistency(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
