//! Closed-form moments of the residual SI power gain and their Gamma fits.
//!
//! For a node with `M` transmit and `N` receive antennas serving `K` streams
//! through unit-norm linear beamformers, and an SI channel with i.i.d.
//! `CN(μ, ν²)` entries, the gain `I = ‖wᵀ H V‖²` has
//!
//! ```text
//! E{I}  = K (μ² + ν²)
//! E{I²} = K ((M+1)/(M-K+2) + K) (2NM/((N+1)(M+1)) μ⁴ + ν²(2μ² + ν²))
//! ```
//!
//! and is approximated by the Gamma law with the same mean and variance.

use crate::channel::RicianSpec;
use crate::error::{invalid, Result};

/// Below this `ν` a Rician SI channel with `μ > 0` is treated as
/// deterministic and the Gamma approximation is refused.
pub const MIN_NU: f64 = 1e-6;

/// Gamma law with shape `kappa` and scale `theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaParams {
    pub kappa: f64,
    pub theta: f64,
}

impl GammaParams {
    pub fn new(kappa: f64, theta: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa > 0.0) {
            return invalid(format!("Gamma shape must be finite and positive, got {kappa}"));
        }
        if !(theta.is_finite() && theta > 0.0) {
            return invalid(format!("Gamma scale must be finite and positive, got {theta}"));
        }
        Ok(Self { kappa, theta })
    }

    pub fn mean(&self) -> f64 {
        self.kappa * self.theta
    }

    pub fn variance(&self) -> f64 {
        self.kappa * self.theta * self.theta
    }
}

/// First and second raw moments together with the variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSet {
    pub m1: f64,
    pub m2: f64,
    pub var: f64,
}

/// `L` cells, `K` streams (FD radios) per cell, `M` transmit and `N` receive
/// antennas at each multi-antenna node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SystemGeometry {
    pub cells: usize,
    pub streams: usize,
    pub tx_antennas: usize,
    pub rx_antennas: usize,
}

impl SystemGeometry {
    /// Single-cell geometry in the usual `(M, N, K)` order.
    pub fn new(tx_antennas: usize, rx_antennas: usize, streams: usize) -> Self {
        Self {
            cells: 1,
            streams,
            tx_antennas,
            rx_antennas,
        }
    }

    pub fn with_cells(self, cells: usize) -> Self {
        Self { cells, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let Self {
            cells,
            streams,
            tx_antennas,
            rx_antennas,
        } = *self;
        if cells == 0 || streams == 0 || tx_antennas == 0 || rx_antennas == 0 {
            return invalid(format!("geometry entries must be positive, got {self:?}"));
        }
        if streams > tx_antennas.min(rx_antennas) {
            return invalid(format!(
                "need K <= min(N, M), got K={streams}, M={tx_antennas}, N={rx_antennas}"
            ));
        }
        Ok(())
    }
}

fn check_spec(spec: &RicianSpec) -> Result<()> {
    if spec.mu() > 0.0 && spec.nu() < MIN_NU {
        return invalid(format!(
            "nu = {} is below {MIN_NU}; the residual SI is effectively deterministic",
            spec.nu()
        ));
    }
    Ok(())
}

/// `(μ² + ν², μ⁴, ν²(2μ² + ν²))`. The last term is `V{|h|²}` for one entry.
fn entry_terms(spec: &RicianSpec) -> (f64, f64, f64) {
    let mu2 = spec.mu() * spec.mu();
    let nu2 = spec.nu() * spec.nu();
    (mu2 + nu2, mu2 * mu2, nu2 * (2.0 * mu2 + nu2))
}

/// Gamma fit to `|h|²` for a single SISO link `h ~ CN(μ, ν²)`.
pub fn gamma_siso(spec: RicianSpec) -> Result<GammaParams> {
    check_spec(&spec)?;
    let (power, _, entry_var) = entry_terms(&spec);
    GammaParams::new(power * power / entry_var, entry_var / power)
}

/// Shared denominator `(2NM + K(M-K+2)(NM-N-M-1)/(M+1)) μ⁴ + (N+1)(M+1) ν²(2μ²+ν²)`.
fn mimo_denominator(m: f64, n: f64, k: f64, mu4: f64, entry_var: f64) -> f64 {
    let mu4_coeff = 2.0 * n * m + k * (m - k + 2.0) * (n * m - n - m - 1.0) / (m + 1.0);
    mu4_coeff * mu4 + (n + 1.0) * (m + 1.0) * entry_var
}

fn dims(geom: &SystemGeometry) -> (f64, f64, f64) {
    (
        geom.tx_antennas as f64,
        geom.rx_antennas as f64,
        geom.streams as f64,
    )
}

/// Gamma fit to the MIMO residual SI gain `‖wᵀ H V‖²`.
pub fn gamma_mimo(geom: SystemGeometry, spec: RicianSpec) -> Result<GammaParams> {
    geom.validate()?;
    check_spec(&spec)?;
    let (m, n, k) = dims(&geom);
    let (power, mu4, entry_var) = entry_terms(&spec);
    let denom = mimo_denominator(m, n, k, mu4, entry_var);
    let scale = (n + 1.0) * (m - k + 2.0) * power;
    GammaParams::new(k * scale * power / denom, denom / scale)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpecialCase {
    /// `K = 1`, arbitrary antennas and Rician statistics.
    SingleUser,
    /// `μ = 0`; written in terms of `max(N, M)`.
    RayleighChannel,
    /// `M, N → ∞` with `K` fixed.
    MassiveMimo,
}

/// Closed forms for the three tabulated special cases.
///
/// `RayleighChannel` ignores `spec` and uses `max(N, M)` where the general
/// MIMO expression with `μ = 0` has `M`; the two agree only when `M ≥ N`.
/// `MassiveMimo` ignores the antenna counts. `SingleUser` ignores `K`.
pub fn gamma_special(case: SpecialCase, geom: SystemGeometry, spec: RicianSpec) -> Result<GammaParams> {
    geom.validate()?;
    let (m, n, k) = dims(&geom);
    let mu2 = spec.mu() * spec.mu();
    let nu2 = spec.nu() * spec.nu();
    let (mu4, nu4) = (mu2 * mu2, nu2 * nu2);
    let power = mu2 + nu2;
    match case {
        SpecialCase::SingleUser => {
            check_spec(&spec)?;
            let nm1 = (n + 1.0) * (m + 1.0);
            let kappa = nm1 * power * power
                / ((3.0 * n * m - n - m - 1.0) * mu4 + 2.0 * nm1 * mu2 * nu2 + nm1 * nu4);
            let theta = power + 2.0 * (m * n - n - m - 1.0) * mu4 / (nm1 * power);
            GammaParams::new(kappa, theta)
        }
        SpecialCase::RayleighChannel => {
            let big = n.max(m);
            GammaParams::new(k * (big - k + 2.0) / (big + 1.0), (big + 1.0) / (big - k + 2.0))
        }
        SpecialCase::MassiveMimo => {
            check_spec(&spec)?;
            let spread = (k + 2.0) * mu4 + 2.0 * mu2 * nu2 + nu4;
            GammaParams::new(k * power * power / spread, spread / power)
        }
    }
}

/// `E{‖wᵀ H V‖²} = K (μ² + ν²)`.
pub fn moment1(streams: usize, spec: RicianSpec) -> f64 {
    streams as f64 * spec.omega()
}

/// `E{‖wᵀ H V‖⁴}`.
pub fn moment2(geom: SystemGeometry, spec: RicianSpec) -> Result<f64> {
    geom.validate()?;
    let (m, n, k) = dims(&geom);
    let (_, mu4, entry_var) = entry_terms(&spec);
    let stream_factor = k * ((m + 1.0) / (m - k + 2.0) + k);
    let per_pair = 2.0 * n * m / (n * m + n + m + 1.0) * mu4 + entry_var;
    Ok(stream_factor * per_pair)
}

/// `V{‖wᵀ H V‖²}`, evaluated from its own closed form rather than as
/// `moment2 - moment1²`.
pub fn si_variance(geom: SystemGeometry, spec: RicianSpec) -> Result<f64> {
    geom.validate()?;
    let (m, n, k) = dims(&geom);
    let (_, mu4, entry_var) = entry_terms(&spec);
    let mu4_coeff = (k * (m - k + 2.0) * (n * m - n - m - 1.0) + 2.0 * n * m * (m + 1.0))
        / ((n + 1.0) * (m + 1.0));
    Ok(k / (m - k + 2.0) * (mu4_coeff * mu4 + (m + 1.0) * entry_var))
}

pub fn moments(geom: SystemGeometry, spec: RicianSpec) -> Result<MomentSet> {
    Ok(MomentSet {
        m1: moment1(geom.streams, spec),
        m2: moment2(geom, spec)?,
        var: si_variance(geom, spec)?,
    })
}

/// Method of moments: the Gamma law with mean `m1` and variance `var`.
pub fn moment_match(m1: f64, var: f64) -> Result<GammaParams> {
    if !(m1.is_finite() && m1 > 0.0) || !(var.is_finite() && var > 0.0) {
        return invalid(format!("moment matching needs m1 > 0 and var > 0, got m1={m1}, var={var}"));
    }
    GammaParams::new(m1 * m1 / var, var / m1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(mu: f64, nu: f64) -> RicianSpec {
        RicianSpec::new(mu, nu).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn siso_examples() {
        let g = gamma_siso(spec(0.0, 1.0)).unwrap();
        assert_eq!((g.kappa, g.theta), (1.0, 1.0));
        let g = gamma_siso(spec(0.5, 1.0)).unwrap();
        assert!(rel(g.kappa, 25.0 / 24.0) < 1e-15);
        assert!(rel(g.theta, 1.2) < 1e-15);
        assert!(rel(g.mean(), 1.25) < 1e-15);
    }

    #[test]
    fn mimo_examples() {
        let g = gamma_mimo(SystemGeometry::new(16, 8, 1), spec(0.0, 1.0)).unwrap();
        assert!(rel(g.kappa, 1.0) < 1e-15 && rel(g.theta, 1.0) < 1e-15);

        let g = gamma_mimo(SystemGeometry::new(16, 8, 1), spec(0.5, 1.0)).unwrap();
        assert!(rel(g.kappa, 3825.0 / 4031.0) < 1e-14, "{}", g.kappa);
        assert!(rel(g.theta, 4031.0 / 3060.0) < 1e-14, "{}", g.theta);

        let g = gamma_mimo(SystemGeometry::new(16, 8, 3), spec(0.0, 1.0)).unwrap();
        assert!(rel(g.kappa, 45.0 / 17.0) < 1e-14);
        assert!(rel(g.theta, 17.0 / 15.0) < 1e-14);
    }

    #[test]
    fn mimo_reduces_to_siso_for_one_antenna() {
        for s in [spec(0.0, 1.0), spec(0.5, 1.0), spec(2.0, 0.3)] {
            let a = gamma_mimo(SystemGeometry::new(1, 1, 1), s).unwrap();
            let b = gamma_siso(s).unwrap();
            assert!(rel(a.kappa, b.kappa) < 1e-12 && rel(a.theta, b.theta) < 1e-12);
        }
    }

    #[test]
    fn special_case_examples() {
        let g = gamma_special(SpecialCase::RayleighChannel, SystemGeometry::new(16, 8, 1), spec(0.0, 1.0)).unwrap();
        assert_eq!((g.kappa, g.theta), (1.0, 1.0));
        let g = gamma_special(SpecialCase::MassiveMimo, SystemGeometry::new(4, 4, 2), spec(0.0, 1.0)).unwrap();
        assert_eq!((g.kappa, g.theta), (2.0, 1.0));

        let geom = SystemGeometry::new(512, 512, 2);
        let a = gamma_special(SpecialCase::MassiveMimo, geom, spec(0.5, 1.0)).unwrap();
        let b = gamma_mimo(geom, spec(0.5, 1.0)).unwrap();
        assert!(rel(a.kappa, b.kappa) < 0.01 && rel(a.theta, b.theta) < 0.01);
    }

    #[test]
    fn rayleigh_row_uses_max_antennas() {
        // With N > M the tabulated row differs from the μ = 0 limit of the
        // general expression, which depends on M only.
        let geom = SystemGeometry::new(4, 8, 2);
        let table = gamma_special(SpecialCase::RayleighChannel, geom, spec(0.0, 1.0)).unwrap();
        assert!(rel(table.kappa, 2.0 * 8.0 / 9.0) < 1e-15);
        assert!(rel(table.theta, 9.0 / 8.0) < 1e-15);
        let general = gamma_mimo(geom, spec(0.0, 1.0)).unwrap();
        assert!(rel(general.kappa, 2.0 * 4.0 / 5.0) < 1e-15);
        assert!(rel(general.theta, 5.0 / 4.0) < 1e-15);

        let geom = SystemGeometry::new(8, 4, 2);
        let table = gamma_special(SpecialCase::RayleighChannel, geom, spec(0.0, 1.0)).unwrap();
        let general = gamma_mimo(geom, spec(0.0, 1.0)).unwrap();
        assert!(rel(table.kappa, general.kappa) < 1e-14 && rel(table.theta, general.theta) < 1e-14);
    }

    #[test]
    fn moment_examples() {
        assert_eq!(moment1(1, spec(0.0, 1.0)), 1.0);
        assert_eq!(moment1(3, spec(0.5, 1.0)), 3.75);
        assert_eq!(moment1(1, spec(0.5, 1.0)), 1.25);

        let one = SystemGeometry::new(1, 1, 1);
        assert_eq!(moment2(one, spec(0.0, 1.0)).unwrap(), 2.0);
        assert_eq!(si_variance(one, spec(0.0, 1.0)).unwrap(), 1.0);

        // (16, 8, 3, 0.5, 1): 3 (17/15 + 3) (256/153 / 16 + 1.5)
        let m2 = moment2(SystemGeometry::new(16, 8, 3), spec(0.5, 1.0)).unwrap();
        let by_hand = 3.0 * (17.0 / 15.0 + 3.0) * (256.0 / 153.0 * 0.0625 + 1.5);
        assert!(rel(m2, by_hand) < 1e-14);
        assert!(rel(m2, 19.89673202614379) < 1e-14);

        let m2 = moment2(SystemGeometry::new(16, 8, 1), spec(0.5, 1.0)).unwrap();
        let var = si_variance(SystemGeometry::new(16, 8, 1), spec(0.5, 1.0)).unwrap();
        assert!(rel(var, m2 - 1.5625) < 1e-12);
    }

    #[test]
    fn moment_match_examples() {
        let g = moment_match(1.0, 1.0).unwrap();
        assert_eq!((g.kappa, g.theta), (1.0, 1.0));
        let g = moment_match(2.0, 1.0).unwrap();
        assert_eq!((g.kappa, g.theta), (4.0, 0.5));
        assert!(moment_match(0.0, 1.0).is_err());
        assert!(moment_match(1.0, -1.0).is_err());

        let geom = SystemGeometry::new(16, 8, 1);
        let s = spec(0.5, 1.0);
        let a = moment_match(moment1(1, s), si_variance(geom, s).unwrap()).unwrap();
        let b = gamma_mimo(geom, s).unwrap();
        assert!(rel(a.kappa, b.kappa) < 1e-12 && rel(a.theta, b.theta) < 1e-12);
    }

    #[test]
    fn invalid_inputs() {
        assert!(gamma_mimo(SystemGeometry::new(2, 8, 3), spec(0.5, 1.0)).is_err());
        assert!(gamma_mimo(SystemGeometry::new(8, 2, 3), spec(0.5, 1.0)).is_err());
        assert!(moment2(SystemGeometry::new(0, 1, 1), spec(0.5, 1.0)).is_err());
        assert!(si_variance(SystemGeometry::new(4, 4, 1).with_cells(0), spec(0.5, 1.0)).is_err());
        assert!(gamma_special(SpecialCase::MassiveMimo, SystemGeometry::new(1, 1, 2), spec(0.5, 1.0)).is_err());
        assert!(gamma_siso(spec(1.0, 1e-7)).is_err());
        assert!(gamma_mimo(SystemGeometry::new(4, 4, 1), spec(1.0, 1e-7)).is_err());
        assert!(gamma_siso(spec(0.0, 1e-7)).is_ok());
    }

    fn valid_input() -> impl Strategy<Value = (SystemGeometry, RicianSpec)> {
        (1usize..64, 1usize..64, 0.0f64..3.0, 0.05f64..3.0).prop_flat_map(|(m, n, mu, nu)| {
            (1usize..=m.min(n)).prop_map(move |k| (SystemGeometry::new(m, n, k), spec(mu, nu)))
        })
    }

    proptest! {
        #[test]
        fn fit_preserves_mean_and_variance((geom, s) in valid_input()) {
            let g = gamma_mimo(geom, s).unwrap();
            prop_assert!(rel(g.mean(), moment1(geom.streams, s)) < 1e-12);
            prop_assert!(rel(g.variance(), si_variance(geom, s).unwrap()) < 1e-9);
        }

        #[test]
        fn variance_matches_raw_moments((geom, s) in valid_input()) {
            let set = moments(geom, s).unwrap();
            prop_assert!(set.m2 >= set.m1 * set.m1);
            prop_assert!(rel(set.var, set.m2 - set.m1 * set.m1) < 1e-9);
        }

        #[test]
        fn single_user_matches_table((geom, s) in valid_input()) {
            let geom = SystemGeometry { streams: 1, ..geom };
            let a = gamma_mimo(geom, s).unwrap();
            let b = gamma_special(SpecialCase::SingleUser, geom, s).unwrap();
            prop_assert!(rel(a.kappa, b.kappa) < 1e-12);
            prop_assert!(rel(a.theta, b.theta) < 1e-12);
        }

        #[test]
        fn one_by_one_second_moment(mu in 0.0f64..5.0, nu in 0.01f64..5.0) {
            let m2 = moment2(SystemGeometry::new(1, 1, 1), spec(mu, nu)).unwrap();
            let raw = mu.powi(4) + 4.0 * mu * mu * nu * nu + 2.0 * nu.powi(4);
            prop_assert!(rel(m2, raw) < 1e-14);
        }
    }
}
