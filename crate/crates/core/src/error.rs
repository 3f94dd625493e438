use thiserror::Error;

/// Errors raised across the laboratory.
#[derive(Debug, Error)]
pub enum LabError {
    /// Invalid grid, parameters, or experiment configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// An operation was called outside of its domain (e.g. a Riesz transform on a field with
    /// nonzero streamwise content).
    #[error("contract violation: {0}")]
    Contract(String),

    /// The requested quantity does not exist in the current rotation regime.
    #[error("regime error: {0}")]
    Regime(String),

    /// A quadrature, fit or integrator failed to reach its tolerance.
    #[error("numerical error: {message} (estimate {estimate:.3e}, tolerance {tolerance:.3e})")]
    Numerical {
        message: String,
        estimate: f64,
        tolerance: f64,
    },

    /// A time step was rejected by the CFL check.
    #[error("CFL violation: dt = {dt:.3e} exceeds bound {suggested:.3e}")]
    Cfl { dt: f64, suggested: f64 },

    /// Non-finite values appeared in the solution.
    #[error("solution diverged at t = {t:.4}")]
    Divergence { t: f64 },

    #[error("remap scheduling error: {0}")]
    Scheduling(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("bisection bracket error: {0}")]
    Bracket(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl LabError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        LabError::Config(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        LabError::Contract(msg.into())
    }

    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) | LabError::Json(_) | LabError::Bracket(_) => 2,
            LabError::Divergence { .. } | LabError::Numerical { .. } | LabError::Cfl { .. } => 3,
            LabError::Contract(_) | LabError::Regime(_) | LabError::Scheduling(_) => 2,
            LabError::Fit(_) => 3,
            LabError::Io(_) => 1,
        }
    }
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;
