use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {detail}")]
    Dimension { op: &'static str, detail: String },

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("matrix is singular to working precision (pivot magnitude {pivot:e})")]
    Singular { pivot: f64 },

    #[error("closed loop is not Schur stable: spectral radius {rho}")]
    Unstable { rho: f64 },

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("Riccati iteration did not converge (last |dP|_F = {last_delta:e}); pair may not be detectable")]
    Detectability { last_delta: f64 },

    #[error("state diverged at step {step}")]
    Divergence { step: usize },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("cannot calibrate constants: {0}")]
    Calibration(String),

    #[error("gain search failed: every grid point is unstable")]
    Search,
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}
