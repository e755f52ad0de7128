use std::f64::consts::{LN_10, PI, SQRT_2};

use super::{align, Score, FLAG_SILENT_FRAMES};
use crate::audio::AudioBuffer;
use crate::dsp::{mel_filterbank, stft_samples, StftConfig};
use crate::error::{Error, Result};

/// Floor added to power spectra in the log-spectral distance.
pub const LSD_EPSILON: f64 = 1e-12;
pub const DEFAULT_MCD_MELS: usize = 80;
pub const DEFAULT_MCD_ORDER: usize = 13;
/// Reference frames more than this far below the loudest frame are skipped by MCD.
const MCD_SILENCE_DB: f64 = 60.0;
const MEL_POWER_FLOOR: f64 = 1e-20;

/// Log-spectral distance in dB: per frame, the RMS over bins of the dB
/// power ratio, then averaged over frames. Frames where both spectra lie
/// entirely below the floor are skipped.
pub fn lsd(reference: &AudioBuffer, estimate: &AudioBuffer, config: &StftConfig) -> Result<Score> {
    let a = align(reference, estimate)?;
    let sr = stft_samples(a.reference, config, a.sample_rate_hz)?.power();
    let se = stft_samples(a.estimate, config, a.sample_rate_hz)?.power();
    let bins = config.n_bins();
    let mut total = 0.0;
    let mut used = 0usize;
    let mut skipped = false;
    for (fr, fe) in sr.chunks(bins).zip(se.chunks(bins)) {
        if fr.iter().chain(fe).all(|&p| p < LSD_EPSILON) {
            skipped = true;
            continue;
        }
        let mean_sq = fr
            .iter()
            .zip(fe)
            .map(|(r, e)| {
                let d = 10.0 * ((r + LSD_EPSILON) / (e + LSD_EPSILON)).log10();
                d * d
            })
            .sum::<f64>()
            / bins as f64;
        total += mean_sq.sqrt();
        used += 1;
    }
    let value = if used == 0 { 0.0 } else { total / used as f64 };
    Ok(a.score(value).flag_if(skipped, FLAG_SILENT_FRAMES))
}

/// Orthonormal DCT-II coefficients `1..=order` of `x`.
struct CepstrumBasis {
    rows: Vec<Vec<f64>>,
}

impl CepstrumBasis {
    fn new(n: usize, order: usize) -> Self {
        let scale = (2.0 / n as f64).sqrt();
        let rows = (1..=order)
            .map(|k| {
                (0..n)
                    .map(|i| scale * (PI * k as f64 * (2 * i + 1) as f64 / (2 * n) as f64).cos())
                    .collect()
            })
            .collect();
        CepstrumBasis { rows }
    }

    fn apply(&self, x: &[f64]) -> impl Iterator<Item = f64> + '_ {
        let x = x.to_vec();
        self.rows
            .iter()
            .map(move |row| row.iter().zip(&x).map(|(a, b)| a * b).sum())
    }
}

/// Mel-cepstral distortion in dB between time-aligned signals.
///
/// Mel cepstra are the orthonormal DCT-II of the natural-log mel power
/// spectrum (HTK mel, `n_mels` bands over 0..Nyquist, metric-default STFT).
/// The distance uses coefficients `1..=order`; `c0` (overall gain) is
/// excluded. Frames are compared one-to-one without time warping.
pub fn mcd(
    reference: &AudioBuffer,
    estimate: &AudioBuffer,
    n_mels: usize,
    order: usize,
) -> Result<Score> {
    if order == 0 || order >= n_mels {
        return Err(Error::InvalidBand(format!(
            "cepstral order {order} must be in 1..{n_mels}"
        )));
    }
    let a = align(reference, estimate)?;
    let config = StftConfig::for_sample_rate(a.sample_rate_hz);
    let fb = mel_filterbank(
        n_mels,
        &config,
        a.sample_rate_hz,
        0.0,
        a.sample_rate_hz as f64 / 2.0,
    )?;
    let sr = stft_samples(a.reference, &config, a.sample_rate_hz)?.power();
    let se = stft_samples(a.estimate, &config, a.sample_rate_hz)?.power();
    let bins = config.n_bins();

    let mel_r: Vec<Vec<f64>> = sr.chunks(bins).map(|f| fb.apply(f)).collect();
    let mel_e: Vec<Vec<f64>> = se.chunks(bins).map(|f| fb.apply(f)).collect();
    let frame_energy: Vec<f64> = mel_r.iter().map(|m| m.iter().sum()).collect();
    let loudest = frame_energy.iter().cloned().fold(0.0, f64::max);
    let floor = loudest * 10f64.powf(-MCD_SILENCE_DB / 10.0);

    let basis = CepstrumBasis::new(n_mels, order);
    let log = |m: &[f64]| -> Vec<f64> { m.iter().map(|p| p.max(MEL_POWER_FLOOR).ln()).collect() };
    let mut total = 0.0;
    let mut used = 0usize;
    for ((mr, me), en) in mel_r.iter().zip(&mel_e).zip(&frame_energy) {
        if *en <= floor || *en == 0.0 {
            continue;
        }
        let (lr, le) = (log(mr), log(me));
        let dist: f64 = basis
            .apply(&lr)
            .zip(basis.apply(&le))
            .map(|(cr, ce)| (cr - ce) * (cr - ce))
            .sum::<f64>()
            .sqrt();
        total += dist;
        used += 1;
    }
    if used == 0 {
        return Err(Error::DegenerateSignal);
    }
    let value = 10.0 * SQRT_2 / LN_10 * total / used as f64;
    Ok(a.score(value)
        .flag_if(used < mel_r.len(), FLAG_SILENT_FRAMES))
}
