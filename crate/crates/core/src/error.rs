use thiserror::Error;

/// Errors raised by the estimation toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("quadrature did not converge: estimated error {estimated_error:.3e} exceeds tolerance {tolerance:.3e}")]
    QuadratureFailure { estimated_error: f64, tolerance: f64 },

    #[error("Fisher information is zero; the variance is unbounded")]
    UnboundedVariance,

    #[error("likelihood is flat in the delay; the parameter is not identifiable")]
    NonIdentifiable,

    #[error("empty sample set")]
    EmptySamples,

    #[error("degenerate fit design: {0}")]
    DegenerateFit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
