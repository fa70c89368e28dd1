use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    /// `1 + 2 lambda rho^2` dropped below the positivity guard.
    #[error("model validity violated at s = {s}: 1 + 2*lambda*|psi|^2 = {value:e}")]
    ModelValidity { s: f64, value: f64 },

    #[error("wavefunctions live on different grids")]
    GridMismatch,

    #[error("wavefunction has {got} samples, grid has {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },

    #[error("ground state did not converge after {iterations} iterations (last residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("solve failed at lambda = {lambda}: {source}")]
    SweepPoint {
        lambda: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("no root bracket for f(lambda = {lambda}, kappa) = 1 in (0, {kappa_max}]; scan max f = {scan_max:e}")]
    NoBracket {
        lambda: f64,
        kappa_max: f64,
        scan_max: f64,
    },

    #[error("d f / d kappa vanished at lambda = {lambda}, kappa = {kappa}")]
    DerivativeSingularity { lambda: f64, kappa: f64 },

    #[error("tail underflow at s = {s}; increase the half width or move the fit window")]
    TailUnderflow { s: f64 },

    #[error("fitted tail decay rate k0 = {k0} outside (0, {upper}]")]
    DecayRate { k0: f64, upper: f64 },

    #[error("quadrature did not reach tolerance: estimate {estimate}, error {error:e}")]
    Quadrature { estimate: f64, error: f64 },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}
