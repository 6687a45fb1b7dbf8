//! Zero-forcing beamformers and the residual SI power gain.
//!
//! The precoder `V` (M×K) is the right pseudo-inverse of the downlink channel
//! with unit-norm columns; the decoder `W` (K×N) is the left pseudo-inverse of
//! the uplink channel with unit-norm rows. Any other linear design can be
//! plugged in through [`BeamformerPair::new`] as long as it keeps the
//! unit-norm convention.

use crate::error::{invalid, Error, Result};
use crate::matrix::ComplexMatrix;

/// Tolerance on the unit-norm convention for externally supplied beamformers.
pub const NORM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerPair {
    precoder: ComplexMatrix,
    decoder: ComplexMatrix,
}

impl BeamformerPair {
    /// Wraps an arbitrary precoder (M×K) and decoder (K×N).
    ///
    /// Fails unless every precoder column and every decoder row has unit
    /// Euclidean norm and both serve the same number of streams.
    pub fn new(precoder: ComplexMatrix, decoder: ComplexMatrix) -> Result<Self> {
        if precoder.cols() != decoder.rows() {
            return invalid(format!(
                "precoder serves {} streams but decoder serves {}",
                precoder.cols(),
                decoder.rows()
            ));
        }
        for j in 0..precoder.cols() {
            let norm = precoder.column_norm(j);
            if (norm - 1.0).abs() > NORM_TOLERANCE {
                return invalid(format!("precoder column {j} has norm {norm}, expected 1"));
            }
        }
        for i in 0..decoder.rows() {
            let norm = decoder.row_norm(i);
            if (norm - 1.0).abs() > NORM_TOLERANCE {
                return invalid(format!("decoder row {i} has norm {norm}, expected 1"));
            }
        }
        Ok(Self { precoder, decoder })
    }

    /// ZF precoder for `h_down` (K×M) and ZF decoder for `h_up` (N×K).
    pub fn zero_forcing(h_down: &ComplexMatrix, h_up: &ComplexMatrix) -> Result<Self> {
        Self::new(zf_precoder(h_down)?, zf_decoder(h_up)?)
    }

    /// `V`, M×K.
    pub fn precoder(&self) -> &ComplexMatrix {
        &self.precoder
    }

    /// `W`, K×N.
    pub fn decoder(&self) -> &ComplexMatrix {
        &self.decoder
    }

    pub fn streams(&self) -> usize {
        self.precoder.cols()
    }

    /// `‖w_kᵀ H_si V‖²` for decoder row `k`.
    pub fn residual_si_gain(&self, k: usize, h_si: &ComplexMatrix) -> Result<f64> {
        if k >= self.decoder.rows() {
            return invalid(format!("stream index {k} out of range"));
        }
        residual_si_gain(&self.decoder.row(k), h_si, &self.precoder)
    }
}

/// Moore-Penrose pseudo-inverse through the SVD.
///
/// Fails with [`Error::SingularChannel`] when the smallest singular value is
/// at or below `max(rows, cols) · ε · σ_max`.
pub fn pseudo_inverse(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let svd = h.to_nalgebra().svd(true, true);
    let sigma_max = svd.singular_values.max();
    let sigma_min = svd.singular_values.min();
    let tolerance = h.rows().max(h.cols()) as f64 * f64::EPSILON * sigma_max;
    if sigma_min.is_nan() || sigma_min <= tolerance {
        return Err(Error::SingularChannel { sigma_min, tolerance });
    }
    let pinv = svd
        .pseudo_inverse(tolerance)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(ComplexMatrix::from_nalgebra(&pinv))
}

/// Zero-forcing precoder for the downlink channel `h_down` (K×M, K ≤ M).
///
/// Column `k` of the result is column `k` of `H†(HH†)⁻¹` scaled by a positive
/// real factor to unit norm, so `H·V` is diagonal with positive diagonal.
pub fn zf_precoder(h_down: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (k, m) = h_down.shape();
    if k > m {
        return invalid(format!("zero-forcing precoder needs K <= M, got K={k}, M={m}"));
    }
    let mut v = pseudo_inverse(h_down)?;
    for j in 0..k {
        let norm = v.column_norm(j);
        v.scale_column(j, 1.0 / norm);
    }
    Ok(v)
}

/// Zero-forcing decoder for the uplink channel `h_up` (N×K, K ≤ N).
///
/// Row `k` of the result is row `k` of `(H†H)⁻¹H†` scaled to unit norm.
pub fn zf_decoder(h_up: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (n, k) = h_up.shape();
    if k > n {
        return invalid(format!("zero-forcing decoder needs K <= N, got K={k}, N={n}"));
    }
    let mut w = pseudo_inverse(h_up)?;
    for i in 0..k {
        let norm = w.row_norm(i);
        w.scale_row(i, 1.0 / norm);
    }
    Ok(w)
}

/// Squared norm of the 1×K vector `wᵀ · H_si · V`.
pub fn residual_si_gain(w_row: &ComplexMatrix, h_si: &ComplexMatrix, v: &ComplexMatrix) -> Result<f64> {
    if w_row.rows() != 1 {
        return invalid(format!("decoder row must be 1xN, got {}x{}", w_row.rows(), w_row.cols()));
    }
    if w_row.cols() != h_si.rows() || h_si.cols() != v.rows() {
        return invalid(format!(
            "incompatible shapes: w 1x{}, H {}x{}, V {}x{}",
            w_row.cols(),
            h_si.rows(),
            h_si.cols(),
            v.rows(),
            v.cols()
        ));
    }
    Ok(w_row.matmul(h_si)?.matmul(v)?.norm_sqr())
}
