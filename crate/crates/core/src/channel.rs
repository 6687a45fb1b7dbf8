//! Seedable complex Gaussian channel generation.
//!
//! Residual SI links are Rician, `CN(μ, ν²)`, with the mean on the real axis
//! and variance `ν²/2` per component. Every other link is Rayleigh `CN(0, 1)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::matrix::{ComplexMatrix, ComplexScalar};

/// Statistics of a Rician link: mean `mu` and total scattered variance `nu²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicianSpec {
    mu: f64,
    nu: f64,
}

impl RicianSpec {
    pub fn new(mu: f64, nu: f64) -> Result<Self> {
        if !mu.is_finite() || mu < 0.0 {
            return invalid(format!("mu must be finite and non-negative, got {mu}"));
        }
        if !nu.is_finite() || nu <= 0.0 {
            return invalid(format!("nu must be finite and positive, got {nu}"));
        }
        Ok(Self { mu, nu })
    }

    /// `CN(0, 1)`.
    pub fn rayleigh() -> Self {
        Self { mu: 0.0, nu: 1.0 }
    }

    /// Builds the spec from the Rician factor `varpi = μ²/ν²` and the fading
    /// attenuation `omega = μ² + ν²`.
    pub fn from_factor(varpi: f64, omega: f64) -> Result<Self> {
        if !varpi.is_finite() || varpi < 0.0 {
            return invalid(format!("Rician factor must be finite and non-negative, got {varpi}"));
        }
        if !omega.is_finite() || omega <= 0.0 {
            return invalid(format!("fading attenuation must be finite and positive, got {omega}"));
        }
        let mu = (varpi * omega / (varpi + 1.0)).sqrt();
        let nu = (omega / (varpi + 1.0)).sqrt();
        Self::new(mu, nu)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// `ϖ = μ²/ν²`.
    pub fn rician_factor(&self) -> f64 {
        self.mu * self.mu / (self.nu * self.nu)
    }

    /// `Ω = μ² + ν² = E{|h|²}`.
    pub fn omega(&self) -> f64 {
        self.mu * self.mu + self.nu * self.nu
    }

    #[inline]
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> ComplexScalar {
        let sigma = self.nu * std::f64::consts::FRAC_1_SQRT_2;
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        ComplexScalar::new(self.mu + sigma * re, sigma * im)
    }
}

pub fn rician_from_factor(varpi: f64, omega: f64) -> Result<RicianSpec> {
    RicianSpec::from_factor(varpi, omega)
}

/// Identifies one reproducible random substream.
///
/// A handle maps to a ChaCha8 generator keyed by `seed` with its 64-bit stream
/// selector set to `stream_id`, so substreams are independent and can be
/// materialised in any order on any thread.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngHandle {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngHandle {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn substream(&self, stream_id: u64) -> Self {
        Self { seed: self.seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Draws one `CN(mu, nu²)` scalar.
pub fn sample_complex_gaussian<R: Rng + ?Sized>(mu: f64, nu: f64, rng: &mut R) -> Result<ComplexScalar> {
    Ok(RicianSpec::new(mu, nu)?.draw(rng))
}

/// Draws a `rows×cols` matrix with i.i.d. entries distributed per `spec`.
/// Entries are drawn in row-major order.
pub fn generate_matrix<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    spec: RicianSpec,
    rng: &mut R,
) -> Result<ComplexMatrix> {
    if rows == 0 || cols == 0 {
        return invalid(format!("matrix dimensions must be positive, got {rows}x{cols}"));
    }
    Ok(ComplexMatrix::from_fn(rows, cols, |_, _| spec.draw(rng)))
}
