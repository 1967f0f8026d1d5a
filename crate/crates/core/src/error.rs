//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of state construction, integration, and quadrature.
///
/// Payloads are widened to `f64` so the enum stays non-generic and cheap to
/// pass through every scalar instantiation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The action coordinate left its physical range.
    #[error("action I = {value} is outside [-1, 1]")]
    ActionOutOfRange { value: f64 },

    /// Two-level amplitudes must satisfy |a1|^2 + |a2|^2 = 1.
    #[error("amplitudes are not normalized: |a1|^2 + |a2|^2 = {norm}")]
    NotNormalized { norm: f64 },

    /// A squared radius was required to be non-negative.
    #[error("squared radius {r_squared} is negative")]
    NegativeSquaredRadius { r_squared: f64 },

    /// The angle rate diverges at the poles of the sphere, so evaluation
    /// refuses to come closer to |I| = 1 than the configured guard band.
    #[error("action I = {action} is within {guard} of a pole")]
    PoleProximity { action: f64, guard: f64 },

    /// The damped cycle only makes sense while gamma*pi/(2*epsilon) <= 1;
    /// beyond that the radius would turn negative before the cycle closes.
    #[error("damping coupling gamma*pi/(2*epsilon) = {coupling} exceeds 1")]
    RenormalizationBound { coupling: f64 },

    /// Adaptive quadrature ran out of subdivisions before reaching tolerance.
    #[error(
        "quadrature did not reach tolerance: value {value}, error bound {error_bound} \
         after {subdivisions} subdivisions"
    )]
    QuadratureNoConvergence {
        value: f64,
        error_bound: f64,
        subdivisions: usize,
    },

    /// Catch-all for precondition violations on plain parameters.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
