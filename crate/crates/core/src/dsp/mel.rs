use super::stft::StftConfig;
use crate::error::{Error, Result};

/// HTK mel scale.
pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular filters over the one-sided STFT bins, peak-normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFilterbank {
    weights: Vec<f64>,
    n_mels: usize,
    n_bins: usize,
    fmin_hz: f64,
    fmax_hz: f64,
    sample_rate_hz: u32,
}

impl MelFilterbank {
    pub fn n_mels(&self) -> usize {
        self.n_mels
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn fmin_hz(&self) -> f64 {
        self.fmin_hz
    }

    pub fn fmax_hz(&self) -> f64 {
        self.fmax_hz
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    /// Weights of filter `m` across all bins.
    pub fn filter(&self, m: usize) -> &[f64] {
        &self.weights[m * self.n_bins..(m + 1) * self.n_bins]
    }

    /// Projects one power-spectrum frame onto the filters.
    pub fn apply(&self, power: &[f64]) -> Vec<f64> {
        debug_assert_eq!(power.len(), self.n_bins);
        (0..self.n_mels)
            .map(|m| self.filter(m).iter().zip(power).map(|(w, p)| w * p).sum())
            .collect()
    }
}

/// Builds `n_mels` HTK-mel triangles spanning `[fmin_hz, fmax_hz]`.
///
/// Filter `m` rises from edge `m` to a peak of 1 at edge `m+1` and falls to
/// zero at edge `m+2`, with the `n_mels + 2` edges equally spaced in mel.
pub fn mel_filterbank(
    n_mels: usize,
    config: &StftConfig,
    sample_rate_hz: u32,
    fmin_hz: f64,
    fmax_hz: f64,
) -> Result<MelFilterbank> {
    let nyquist = sample_rate_hz as f64 / 2.0;
    if n_mels < 2 {
        return Err(Error::InvalidBand(format!(
            "need at least 2 mel bands, got {n_mels}"
        )));
    }
    if !(fmin_hz >= 0.0 && fmin_hz < fmax_hz && fmax_hz <= nyquist) {
        return Err(Error::InvalidBand(format!(
            "require 0 <= fmin < fmax <= {nyquist}, got [{fmin_hz}, {fmax_hz}]"
        )));
    }
    let n_bins = config.n_bins();
    let bin_hz = sample_rate_hz as f64 / config.fft_size() as f64;
    let (lo, hi) = (hz_to_mel(fmin_hz), hz_to_mel(fmax_hz));
    let edges: Vec<f64> = (0..n_mels + 2)
        .map(|i| mel_to_hz(lo + (hi - lo) * i as f64 / (n_mels + 1) as f64))
        .collect();
    // Pin the outer edges so round-off cannot move them past the band.
    let mut edges = edges;
    edges[0] = fmin_hz;
    edges[n_mels + 1] = fmax_hz;

    let mut weights = vec![0.0; n_mels * n_bins];
    for m in 0..n_mels {
        let (left, center, right) = (edges[m], edges[m + 1], edges[m + 2]);
        let row = &mut weights[m * n_bins..(m + 1) * n_bins];
        for (k, w) in row.iter_mut().enumerate() {
            let f = k as f64 * bin_hz;
            let v = if f > left && f <= center {
                (f - left) / (center - left)
            } else if f > center && f < right {
                (right - f) / (right - center)
            } else {
                0.0
            };
            *w = v.max(0.0);
        }
        if row.iter().all(|&w| w == 0.0) {
            return Err(Error::InvalidBand(format!(
                "mel filter {m} ({left:.1}-{right:.1} Hz) covers no FFT bin; use fewer mels or a longer FFT"
            )));
        }
    }
    Ok(MelFilterbank {
        weights,
        n_mels,
        n_bins,
        fmin_hz,
        fmax_hz,
        sample_rate_hz,
    })
}
