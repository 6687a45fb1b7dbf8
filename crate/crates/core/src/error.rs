use thiserror::Error;

/// Errors produced by channel generation, beamformer construction and the
/// closed-form / Monte Carlo evaluators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The channel matrix is numerically rank deficient, so no zero-forcing
    /// solution exists.
    #[error("singular channel: smallest singular value {sigma_min:e} is below tolerance {tolerance:e}")]
    SingularChannel { sigma_min: f64, tolerance: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
