use thiserror::Error;

/// Errors shared across the solver modules.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid too small: need at least {needed} nodes, got {got}")]
    GridTooSmall { needed: usize, got: usize },

    #[error("grids do not match ({left} vs {right} nodes)")]
    GridMismatch { left: usize, right: usize },

    #[error("tail fit failure: {0}")]
    TailFit(String),

    #[error(
        "fixed-point iteration did not converge in {iterations} sweeps \
         (last distance {last_distance:.3e}, tol {tol:.3e})"
    )]
    NonConvergence {
        iterations: usize,
        last_distance: f64,
        tol: f64,
        distances: Vec<f64>,
    },

    #[error("shooting bracket failure: {message}")]
    ShootingFailure {
        message: String,
        history: Vec<(f64, f64)>,
    },

    #[error("regime violation: {0}")]
    RegimeViolation(String),

    #[error("classification failure: {0}")]
    ClassificationFailure(String),

    #[error("density lost positivity at t = {t:.6}, r = {r:.6} (rho = {rho:.3e})")]
    BlowUp { t: f64, r: f64, rho: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unknown stationary method '{0}' (known: fixed-point, shooting)")]
    UnknownMethod(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
