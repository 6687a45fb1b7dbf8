//! Residual self-interference (SI) statistics for full-duplex multi-user
//! MIMO nodes over Rician fading.
//!
//! The crate has two halves that check each other:
//!
//! - [`closedform`] evaluates the moment expressions of the residual SI power
//!   gain `‖wᵀ H V‖²` and the Gamma law obtained by matching them.
//! - [`mc`] simulates the whole chain (Rician SI channel, Rayleigh user
//!   channels, zero-forcing beamformers) and measures the same quantities.
//!
//! [`channel`], [`beamforming`] and [`stats`] hold the building blocks.

pub mod beamforming;
pub mod channel;
pub mod closedform;
mod error;
pub mod matrix;
pub mod mc;
pub mod stats;

pub use beamforming::{residual_si_gain, zf_decoder, zf_precoder, BeamformerPair};
pub use channel::{
    generate_matrix, rician_from_factor, sample_complex_gaussian, RicianSpec, RngHandle,
};
pub use closedform::{
    gamma_mimo, gamma_siso, gamma_special, moment1, moment2, moment_match, moments,
    si_variance, GammaParams, MomentSet, SpecialCase, SystemGeometry,
};
pub use error::{Error, Result};
pub use matrix::{ComplexMatrix, ComplexScalar};
pub use mc::{
    run_si, run_si_empirical, run_si_theoretical, run_sinr, sinr_sample_downlink,
    sinr_sample_uplink, Direction, ExperimentConfig, McReport, Mode, SinrReport, SinrSample,
};
pub use stats::{
    gamma_cdf, gamma_pdf, gamma_sample, histogram, ks_distance, si_pdf_siso, GofReport,
    Histogram,
};
