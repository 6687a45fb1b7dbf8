//! Monte Carlo engine.
//!
//! Two ways of producing residual SI samples are compared:
//!
//! - **empirical**: draw the Rician SI channel and the Rayleigh user channels,
//!   build zero-forcing beamformers and measure `‖w₁ᵀ H V‖²`;
//! - **theoretical**: draw directly from the moment-matched Gamma law.
//!
//! The engine also assembles full per-radio SINR term breakdowns for the
//! downlink and uplink of a multi-cell full-duplex deployment.
//!
//! Trial `t` always draws from [`RngHandle`] `(seed, t)`. Trials are processed
//! in fixed blocks of [`BLOCK_TRIALS`] and block partial sums are merged in
//! block order, so every report is bitwise identical for any thread count.

use rand::Rng;
use rayon::prelude::*;

use crate::beamforming::{zf_decoder, zf_precoder, BeamformerPair};
use crate::channel::{generate_matrix, RicianSpec, RngHandle};
use crate::closedform::{gamma_mimo, GammaParams, SystemGeometry};
use crate::error::{invalid, Error, Result};
use crate::matrix::ComplexMatrix;
use crate::stats::{sampler, GofReport};

pub const BLOCK_TRIALS: u64 = 4096;

/// Singular channel draws tolerated within one trial before giving up.
const MAX_REDRAWS: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Empirical,
    Theoretical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Node to FD radios.
    Downlink,
    /// FD radios to node.
    Uplink,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub geom: SystemGeometry,
    /// Residual SI statistics at the multi-antenna node.
    pub si_spec: RicianSpec,
    /// Residual SI statistics at the FD radios; `si_spec` when `None`.
    pub radio_si_spec: Option<RicianSpec>,
    pub trials: u64,
    pub seed: u64,
    /// Receiver noise variance `σ²`.
    pub noise_power: f64,
    pub mode: Mode,
    pub direction: Direction,
}

impl ExperimentConfig {
    pub fn new(geom: SystemGeometry, si_spec: RicianSpec) -> Self {
        Self {
            geom,
            si_spec,
            radio_si_spec: None,
            trials: 1_000_000,
            seed: 0,
            noise_power: 1.0,
            mode: Mode::Empirical,
            direction: Direction::Uplink,
        }
    }

    pub fn with_trials(self, trials: u64) -> Self {
        Self { trials, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn with_mode(self, mode: Mode) -> Self {
        Self { mode, ..self }
    }

    pub fn with_direction(self, direction: Direction) -> Self {
        Self { direction, ..self }
    }

    pub fn with_noise_power(self, noise_power: f64) -> Self {
        Self { noise_power, ..self }
    }

    pub fn radio_spec(&self) -> RicianSpec {
        self.radio_si_spec.unwrap_or(self.si_spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.geom.validate()?;
        if self.trials == 0 {
            return invalid("trials must be at least 1");
        }
        if !(self.noise_power.is_finite() && self.noise_power >= 0.0) {
            return invalid(format!(
                "noise power must be finite and non-negative, got {}",
                self.noise_power
            ));
        }
        Ok(())
    }
}

/// Power gains of the six received-signal components for one radio/stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrSample {
    pub useful: f64,
    pub mui: f64,
    pub ici: f64,
    pub cmi: f64,
    pub si: f64,
    pub noise: f64,
    pub sinr: f64,
}

impl SinrSample {
    pub fn new(useful: f64, mui: f64, ici: f64, cmi: f64, si: f64, noise: f64) -> Self {
        Self {
            useful,
            mui,
            ici,
            cmi,
            si,
            noise,
            sinr: useful / (mui + ici + cmi + si + noise),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McReport {
    /// One residual SI gain per trial, in trial order.
    pub samples: Vec<f64>,
    pub emp_m1: f64,
    pub emp_m2: f64,
    pub emp_var: f64,
    /// Fit against the moment-matched Gamma law of the configured geometry.
    pub gof: GofReport,
    pub reference: GammaParams,
    /// Channel draws rejected as singular and redrawn.
    pub singular_redraws: u64,
    pub config_echo: ExperimentConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SinrReport {
    /// `trials × K` samples, trial-major then radio index.
    pub samples: Vec<SinrSample>,
    pub singular_redraws: u64,
    pub config_echo: ExperimentConfig,
}

struct Block<T> {
    items: Vec<T>,
    sum1: f64,
    sum2: f64,
    redraws: u64,
}

/// Runs `trial` for every index in `0..trials`, block-parallel, preserving
/// trial order and merging partial sums deterministically.
fn run_blocks<T, F, V>(trials: u64, trial: F, value: V) -> Result<(Vec<T>, f64, f64, u64)>
where
    T: Send,
    F: Fn(u64) -> Result<(Vec<T>, u64)> + Sync,
    V: Fn(&T) -> f64 + Sync,
{
    let blocks = trials.div_ceil(BLOCK_TRIALS);
    let partials: Vec<Result<Block<T>>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * BLOCK_TRIALS;
            let end = (start + BLOCK_TRIALS).min(trials);
            let mut block = Block {
                items: Vec::with_capacity((end - start) as usize),
                sum1: 0.0,
                sum2: 0.0,
                redraws: 0,
            };
            for t in start..end {
                let (items, redraws) = trial(t)?;
                block.redraws += redraws;
                for item in items {
                    let x = value(&item);
                    block.sum1 += x;
                    block.sum2 += x * x;
                    block.items.push(item);
                }
            }
            Ok(block)
        })
        .collect();

    let mut items = Vec::with_capacity(trials as usize);
    let (mut sum1, mut sum2, mut redraws) = (0.0, 0.0, 0);
    for block in partials {
        let block = block?;
        sum1 += block.sum1;
        sum2 += block.sum2;
        redraws += block.redraws;
        items.extend(block.items);
    }
    Ok((items, sum1, sum2, redraws))
}

/// Retries `draw` on singular channel realisations, continuing the same
/// random stream. Returns the value and the number of rejected draws.
fn with_redraws<T, R: Rng>(rng: &mut R, mut draw: impl FnMut(&mut R) -> Result<T>) -> Result<(T, u64)> {
    let mut redraws = 0;
    loop {
        match draw(rng) {
            Ok(value) => return Ok((value, redraws)),
            Err(Error::SingularChannel { .. }) if redraws < MAX_REDRAWS => redraws += 1,
            Err(e) => return Err(e),
        }
    }
}

fn si_report(cfg: &ExperimentConfig, samples: Vec<f64>, sum1: f64, sum2: f64, redraws: u64) -> Result<McReport> {
    let n = samples.len() as f64;
    let emp_m1 = sum1 / n;
    let emp_m2 = sum2 / n;
    let emp_var = emp_m2 - emp_m1 * emp_m1;
    let reference = gamma_mimo(cfg.geom, cfg.si_spec)?;
    let gof = GofReport::against_gamma(&samples, emp_m1, emp_var, reference)?;
    Ok(McReport {
        samples,
        emp_m1,
        emp_m2,
        emp_var,
        gof,
        reference,
        singular_redraws: redraws,
        config_echo: *cfg,
    })
}

/// One empirical residual SI draw: Rician `H_si` (N×M), Rayleigh downlink
/// (K×M) and uplink (N×K) channels, ZF beamformers, `‖w₁ᵀ H_si V‖²`.
pub fn si_gain_trial<R: Rng>(geom: &SystemGeometry, si_spec: RicianSpec, rng: &mut R) -> Result<f64> {
    let (m, n, k) = (geom.tx_antennas, geom.rx_antennas, geom.streams);
    let h_si = generate_matrix(n, m, si_spec, rng)?;
    let h_down = generate_matrix(k, m, RicianSpec::rayleigh(), rng)?;
    let h_up = generate_matrix(n, k, RicianSpec::rayleigh(), rng)?;
    BeamformerPair::zero_forcing(&h_down, &h_up)?.residual_si_gain(0, &h_si)
}

pub fn run_si_empirical(cfg: &ExperimentConfig) -> Result<McReport> {
    if cfg.mode != Mode::Empirical {
        return invalid("run_si_empirical needs an empirical-mode config");
    }
    cfg.validate()?;
    gamma_mimo(cfg.geom, cfg.si_spec)?;
    let base = RngHandle::new(cfg.seed, 0);
    let (samples, sum1, sum2, redraws) = run_blocks(
        cfg.trials,
        |t| {
            let mut rng = base.substream(t).rng();
            let (gain, redraws) = with_redraws(&mut rng, |rng| si_gain_trial(&cfg.geom, cfg.si_spec, rng))?;
            Ok((vec![gain], redraws))
        },
        |&x| x,
    )?;
    si_report(cfg, samples, sum1, sum2, redraws)
}

pub fn run_si_theoretical(cfg: &ExperimentConfig) -> Result<McReport> {
    if cfg.mode != Mode::Theoretical {
        return invalid("run_si_theoretical needs a theoretical-mode config");
    }
    cfg.validate()?;
    let dist = sampler(gamma_mimo(cfg.geom, cfg.si_spec)?);
    let base = RngHandle::new(cfg.seed, 0);
    let (samples, sum1, sum2, redraws) = run_blocks(
        cfg.trials,
        |t| {
            let mut rng = base.substream(t).rng();
            Ok((vec![rng.sample(dist)], 0))
        },
        |&x| x,
    )?;
    si_report(cfg, samples, sum1, sum2, redraws)
}

/// Dispatches on `cfg.mode`.
pub fn run_si(cfg: &ExperimentConfig) -> Result<McReport> {
    match cfg.mode {
        Mode::Empirical => run_si_empirical(cfg),
        Mode::Theoretical => run_si_theoretical(cfg),
    }
}

fn row_power(m: &ComplexMatrix, i: usize) -> f64 {
    (0..m.cols()).map(|j| m[(i, j)].norm_sqr()).sum()
}

/// Row power with column `i` left out.
fn row_power_except(m: &ComplexMatrix, i: usize) -> f64 {
    (0..m.cols()).filter(|&j| j != i).map(|j| m[(i, j)].norm_sqr()).sum()
}

fn noise_sample<R: Rng>(rows: usize, noise_power: f64, rng: &mut R) -> Result<Option<ComplexMatrix>> {
    if noise_power > 0.0 {
        let spec = RicianSpec::new(0.0, noise_power.sqrt())?;
        Ok(Some(generate_matrix(rows, 1, spec, rng)?))
    } else {
        Ok(None)
    }
}

/// Downlink terms for every radio of cell 0.
///
/// Other cells' precoders are ZF on their own independent channels. The
/// cross-mode term sums `|h|²` over every FD radio in every cell except the
/// receiving radio itself; each radio's own SI link is SISO Rician.
pub fn sinr_sample_downlink<R: Rng>(cfg: &ExperimentConfig, rng: &mut R) -> Result<Vec<SinrSample>> {
    if cfg.direction != Direction::Downlink {
        return invalid("sinr_sample_downlink needs a downlink config");
    }
    cfg.validate()?;
    let SystemGeometry {
        cells: l,
        streams: k,
        tx_antennas: m,
        ..
    } = cfg.geom;
    let rayleigh = RicianSpec::rayleigh();

    let h_own = generate_matrix(k, m, rayleigh, rng)?;
    let own_gains = h_own.matmul(&zf_precoder(&h_own)?)?;

    let mut ici = vec![0.0; k];
    for _ in 1..l {
        let h_cross = generate_matrix(k, m, rayleigh, rng)?;
        let v_other = zf_precoder(&generate_matrix(k, m, rayleigh, rng)?)?;
        let leak = h_cross.matmul(&v_other)?;
        for (i, term) in ici.iter_mut().enumerate() {
            *term += row_power(&leak, i);
        }
    }

    let cross_mode = generate_matrix(k, l * k, rayleigh, rng)?;
    let si = generate_matrix(k, 1, cfg.radio_spec(), rng)?;
    let noise = noise_sample(k, cfg.noise_power, rng)?;

    Ok((0..k)
        .map(|i| {
            let useful = own_gains[(i, i)].norm_sqr();
            let mui = row_power_except(&own_gains, i);
            let cmi = row_power_except(&cross_mode, i);
            let noise = noise.as_ref().map_or(0.0, |eta| eta[(i, 0)].norm_sqr());
            SinrSample::new(useful, mui, ici[i], cmi, si[(i, 0)].norm_sqr(), noise)
        })
        .collect())
}

/// Uplink terms for every stream decoded at the node of cell 0.
///
/// Inter-cell interference comes from every FD radio of the other cells;
/// cross-mode interference from the other nodes' ZF-precoded downlink
/// transmissions; residual SI is `‖w_kᵀ H_si V‖²` with this node's own
/// precoder.
pub fn sinr_sample_uplink<R: Rng>(cfg: &ExperimentConfig, rng: &mut R) -> Result<Vec<SinrSample>> {
    if cfg.direction != Direction::Uplink {
        return invalid("sinr_sample_uplink needs an uplink config");
    }
    cfg.validate()?;
    let SystemGeometry {
        cells: l,
        streams: k,
        tx_antennas: m,
        rx_antennas: n,
    } = cfg.geom;
    let rayleigh = RicianSpec::rayleigh();

    let h_up = generate_matrix(n, k, rayleigh, rng)?;
    let w = zf_decoder(&h_up)?;
    let own_gains = w.matmul(&h_up)?;
    let v_own = zf_precoder(&generate_matrix(k, m, rayleigh, rng)?)?;
    let si_leak = w.matmul(&generate_matrix(n, m, cfg.si_spec, rng)?)?.matmul(&v_own)?;

    let mut ici = vec![0.0; k];
    let mut cmi = vec![0.0; k];
    for _ in 1..l {
        let radios = w.matmul(&generate_matrix(n, k, rayleigh, rng)?)?;
        let h_nodes = generate_matrix(n, m, rayleigh, rng)?;
        let v_other = zf_precoder(&generate_matrix(k, m, rayleigh, rng)?)?;
        let node_leak = w.matmul(&h_nodes)?.matmul(&v_other)?;
        for i in 0..k {
            ici[i] += row_power(&radios, i);
            cmi[i] += row_power(&node_leak, i);
        }
    }

    let noise = match noise_sample(n, cfg.noise_power, rng)? {
        Some(eta) => Some(w.matmul(&eta)?),
        None => None,
    };

    Ok((0..k)
        .map(|i| {
            let useful = own_gains[(i, i)].norm_sqr();
            let mui = row_power_except(&own_gains, i);
            let noise = noise.as_ref().map_or(0.0, |x| x[(i, 0)].norm_sqr());
            SinrSample::new(useful, mui, ici[i], cmi[i], row_power(&si_leak, i), noise)
        })
        .collect())
}

/// Runs `cfg.trials` SINR trials in the configured direction.
pub fn run_sinr(cfg: &ExperimentConfig) -> Result<SinrReport> {
    cfg.validate()?;
    let base = RngHandle::new(cfg.seed, 0);
    let (samples, _, _, redraws) = run_blocks(
        cfg.trials,
        |t| {
            let mut rng = base.substream(t).rng();
            with_redraws(&mut rng, |rng| match cfg.direction {
                Direction::Downlink => sinr_sample_downlink(cfg, rng),
                Direction::Uplink => sinr_sample_uplink(cfg, rng),
            })
        },
        |s: &SinrSample| s.sinr,
    )?;
    Ok(SinrReport {
        samples,
        singular_redraws: redraws,
        config_echo: *cfg,
    })
}
