//! Densities, sampling and goodness-of-fit tools.

use rand::Rng;
use rand_distr::Distribution;
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::closedform::GammaParams;
use crate::error::{invalid, Result};

/// Crossover between the power series and the asymptotic expansion of `I₀`.
const I0_SERIES_LIMIT: f64 = 15.0;

/// `ln I₀(x)` for `x ≥ 0`, finite for arguments far beyond where `I₀` itself
/// overflows.
pub fn ln_bessel_i0(x: f64) -> f64 {
    let x = x.abs();
    if x < I0_SERIES_LIMIT {
        // Σ (x²/4)^j / (j!)²
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut j = 1.0;
        while term > sum * 1e-17 {
            term *= q / (j * j);
            sum += term;
            j += 1.0;
        }
        sum.ln()
    } else {
        // e^x / √(2πx) · Σ ((2j-1)!!)² / (j! (8x)^j)
        let mut term = 1.0;
        let mut sum = 1.0;
        for j in 1..40 {
            let odd = (2 * j - 1) as f64;
            let next = term * odd * odd / (j as f64 * 8.0 * x);
            if next < sum * 1e-17 || next > term {
                break;
            }
            term = next;
            sum += term;
        }
        x - 0.5 * (2.0 * std::f64::consts::PI * x).ln() + sum.ln()
    }
}

/// Density of the SISO residual SI power `|h|²` (non-central chi-squared with
/// two degrees of freedom) for Rician factor `varpi` and attenuation `omega`.
pub fn si_pdf_siso(x: f64, varpi: f64, omega: f64) -> Result<f64> {
    if !(x.is_finite() && x >= 0.0) {
        return invalid(format!("density argument must be finite and non-negative, got {x}"));
    }
    if !(varpi.is_finite() && varpi >= 0.0) {
        return invalid(format!("Rician factor must be finite and non-negative, got {varpi}"));
    }
    if !(omega.is_finite() && omega > 0.0) {
        return invalid(format!("fading attenuation must be finite and positive, got {omega}"));
    }
    let rate = (1.0 + varpi) / omega;
    let bessel_arg = 2.0 * (varpi * rate * x).sqrt();
    Ok((rate.ln() - varpi - rate * x + ln_bessel_i0(bessel_arg)).exp())
}

/// Gamma density with shape `κ` and scale `θ`; zero for `x < 0`.
pub fn gamma_pdf(x: f64, p: GammaParams) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    if x == 0.0 {
        return if p.kappa < 1.0 {
            f64::INFINITY
        } else if p.kappa == 1.0 {
            1.0 / p.theta
        } else {
            0.0
        };
    }
    let ln_pdf = (p.kappa - 1.0) * x.ln() - x / p.theta - ln_gamma(p.kappa) - p.kappa * p.theta.ln();
    ln_pdf.exp()
}

/// Gamma CDF via the regularised lower incomplete gamma function.
pub fn gamma_cdf(x: f64, p: GammaParams) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    gamma_lr(p.kappa, x / p.theta).clamp(0.0, 1.0)
}

/// One Gamma draw (Marsaglia-Tsang, with the `U^{1/κ}` boost for `κ < 1`).
pub fn gamma_sample<R: Rng + ?Sized>(p: GammaParams, rng: &mut R) -> f64 {
    sampler(p).sample(rng)
}

pub(crate) fn sampler(p: GammaParams) -> rand_distr::Gamma<f64> {
    rand_distr::Gamma::new(p.kappa, p.theta).expect("GammaParams are validated on construction")
}

/// Two-sided Kolmogorov-Smirnov statistic `sup |F_n(x) - F(x)|`.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return invalid("KS distance needs at least one sample");
    }
    if samples.iter().any(|x| x.is_nan()) {
        return invalid("KS distance received a NaN sample");
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let d = sorted.iter().enumerate().fold(0.0f64, |acc, (i, &x)| {
        let f = cdf(x);
        let above = (i + 1) as f64 / n - f;
        let below = f - i as f64 / n;
        acc.max(above).max(below)
    });
    Ok(d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl Histogram {
    /// Equal-width bins over `[0, upper]`. Samples above `upper` or below zero
    /// are clamped into the last or first bin.
    pub fn with_upper(samples: &[f64], bins: usize, upper: f64) -> Result<Self> {
        if samples.is_empty() {
            return invalid("histogram needs at least one sample");
        }
        if bins == 0 {
            return invalid("histogram needs at least one bin");
        }
        if !(upper.is_finite() && upper > 0.0) {
            return invalid(format!("histogram upper edge must be finite and positive, got {upper}"));
        }
        let width = upper / bins as f64;
        let bin_edges: Vec<f64> = (0..=bins)
            .map(|i| if i == bins { upper } else { i as f64 * width })
            .collect();
        let mut counts = vec![0u64; bins];
        for &x in samples {
            if x.is_nan() {
                return invalid("histogram received a NaN sample");
            }
            let idx = ((x / width) as usize).min(bins - 1);
            counts[idx] += 1;
        }
        Ok(Self {
            bin_edges,
            counts,
            total: samples.len() as u64,
        })
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    /// Fraction of samples falling in each bin.
    pub fn frequencies(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| c as f64 / self.total as f64)
            .collect()
    }
}

/// Equal-width histogram over `[0, max sample]`.
pub fn histogram(samples: &[f64], bins: usize) -> Result<Histogram> {
    let max = samples.iter().copied().fold(0.0f64, f64::max);
    Histogram::with_upper(samples, bins, if max > 0.0 { max } else { 1.0 })
}

/// How well a sample set agrees with a reference Gamma law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GofReport {
    pub ks_statistic: f64,
    /// `(sample mean - κθ) / κθ`
    pub mean_rel_err: f64,
    /// `(sample variance - κθ²) / κθ²`
    pub var_rel_err: f64,
    pub sample_count: usize,
}

impl GofReport {
    pub fn against_gamma(samples: &[f64], mean: f64, var: f64, reference: GammaParams) -> Result<Self> {
        let ks_statistic = ks_distance(samples, |x| gamma_cdf(x, reference))?;
        Ok(Self {
            ks_statistic,
            mean_rel_err: (mean - reference.mean()) / reference.mean(),
            var_rel_err: (var - reference.variance()) / reference.variance(),
            sample_count: samples.len(),
        })
    }
}
