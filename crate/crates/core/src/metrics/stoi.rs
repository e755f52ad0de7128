use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::{align, Score};
use crate::audio::AudioBuffer;
use crate::dsp::Resampler;
use crate::error::{Error, Result};

const FS: u32 = 10_000;
const FRAME: usize = 256;
const HOP: usize = FRAME / 2;
const NFFT: usize = 512;
const BANDS: usize = 15;
const MIN_FREQ: f64 = 150.0;
const SEGMENT: usize = 30;
const BETA_DB: f64 = -15.0;
const DYN_RANGE_DB: f64 = 40.0;
const EPS: f64 = f64::EPSILON;

/// `np.hanning(FRAME + 2)[1:-1]`: a symmetric Hann without its zero ends.
fn analysis_window() -> Vec<f64> {
    let m = (FRAME + 1) as f64;
    (1..=FRAME)
        .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / m).cos())
        .collect()
}

/// Frame starts `0, HOP, ...` strictly before `len - FRAME`.
fn frame_starts(len: usize) -> impl Iterator<Item = usize> {
    (0..len.saturating_sub(FRAME)).step_by(HOP)
}

/// Drops frames whose reference energy is more than the dynamic range below
/// the loudest frame and overlap-adds the survivors back into signals.
fn remove_silent_frames(x: &[f64], y: &[f64], w: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let starts: Vec<usize> = frame_starts(x.len()).collect();
    let energy_db: Vec<f64> = starts
        .iter()
        .map(|&s| {
            let norm = x[s..s + FRAME]
                .iter()
                .zip(w)
                .map(|(v, wv)| (v * wv) * (v * wv))
                .sum::<f64>()
                .sqrt();
            20.0 * (norm + EPS).log10()
        })
        .collect();
    let max = energy_db.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let kept: Vec<usize> = starts
        .iter()
        .zip(&energy_db)
        .filter(|(_, &e)| max - DYN_RANGE_DB - e < 0.0)
        .map(|(&s, _)| s)
        .collect();
    if kept.is_empty() {
        return (Vec::new(), Vec::new());
    }
    let len = (kept.len() - 1) * HOP + FRAME;
    let (mut xo, mut yo) = (vec![0.0; len], vec![0.0; len]);
    for (i, &s) in kept.iter().enumerate() {
        let o = i * HOP;
        for n in 0..FRAME {
            xo[o + n] += w[n] * x[s + n];
            yo[o + n] += w[n] * y[s + n];
        }
    }
    (xo, yo)
}

/// Band-energy envelopes `[band][frame]` over the one-third-octave bands.
fn octave_envelopes(x: &[f64], w: &[f64], bands: &[(usize, usize)]) -> Vec<Vec<f64>> {
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(NFFT);
    let mut env = vec![Vec::new(); bands.len()];
    let mut buf = vec![Complex64::new(0.0, 0.0); NFFT];
    for s in frame_starts(x.len()) {
        buf.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        for n in 0..FRAME {
            buf[n].re = w[n] * x[s + n];
        }
        fft.process(&mut buf);
        for (e, &(lo, hi)) in env.iter_mut().zip(bands) {
            e.push(buf[lo..hi].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt());
        }
    }
    env
}

/// Bin ranges `[lo, hi)` of the one-third-octave bands, edges snapped to
/// the nearest bin.
fn third_octave_bands() -> Vec<(usize, usize)> {
    let bin_hz = FS as f64 / NFFT as f64;
    let nearest = |f: f64| -> usize {
        let mut best = 0;
        for k in 0..=NFFT / 2 {
            if (k as f64 * bin_hz - f).powi(2) < (best as f64 * bin_hz - f).powi(2) {
                best = k;
            }
        }
        best
    };
    (0..BANDS)
        .map(|k| {
            let k = k as f64;
            let lo = MIN_FREQ * 2f64.powf((2.0 * k - 1.0) / 6.0);
            let hi = MIN_FREQ * 2f64.powf((2.0 * k + 1.0) / 6.0);
            (nearest(lo), nearest(hi))
        })
        .collect()
}

fn to_analysis_rate(x: &[f64], fs: u32) -> Result<Vec<f64>> {
    if fs == FS {
        return Ok(x.to_vec());
    }
    Ok(Resampler::new(fs, FS)?.process(x))
}

fn center_and_normalize(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt() + EPS;
    v.iter_mut().for_each(|x| *x /= norm);
}

/// Short-time objective intelligibility in `[0, 1]`.
///
/// Classic formulation: both signals are resampled to 10 kHz, frames more
/// than 40 dB below the loudest reference frame are removed, 15
/// one-third-octave envelopes from 150 Hz are compared over 30-frame
/// segments after scaling and clipping the estimate (β = −15 dB), and the
/// segment correlations are averaged. Framing is 256-sample Hann frames, hop
/// 128, zero-padded to a 512-point FFT.
pub fn stoi(reference: &AudioBuffer, estimate: &AudioBuffer) -> Result<Score> {
    let a = align(reference, estimate)?;
    let x = to_analysis_rate(a.reference, a.sample_rate_hz)?;
    let y = to_analysis_rate(a.estimate, a.sample_rate_hz)?;
    let w = analysis_window();
    let (x, y) = remove_silent_frames(&x, &y, &w);
    let bands = third_octave_bands();
    let xe = octave_envelopes(&x, &w, &bands);
    let ye = octave_envelopes(&y, &w, &bands);
    let frames = xe[0].len();
    if frames < SEGMENT {
        return Err(Error::TooShort(format!(
            "STOI needs {SEGMENT} analysis frames after silence removal, got {frames}"
        )));
    }
    let clip = 1.0 + 10f64.powf(-BETA_DB / 20.0);
    let mut total = 0.0;
    let segments = frames - SEGMENT + 1;
    for m in SEGMENT..=frames {
        for (xb, yb) in xe.iter().zip(&ye) {
            let mut xs = xb[m - SEGMENT..m].to_vec();
            let ys = &yb[m - SEGMENT..m];
            let nx = xs.iter().map(|v| v * v).sum::<f64>().sqrt();
            let ny = ys.iter().map(|v| v * v).sum::<f64>().sqrt();
            let g = nx / (ny + EPS);
            let mut yp: Vec<f64> = ys
                .iter()
                .zip(&xs)
                .map(|(yv, xv)| (yv * g).min(xv * clip))
                .collect();
            center_and_normalize(&mut yp);
            center_and_normalize(&mut xs);
            total += yp.iter().zip(&xs).map(|(p, q)| p * q).sum::<f64>();
        }
    }
    let d = total / (BANDS * segments) as f64;
    Ok(a.score(d.clamp(0.0, 1.0)))
}
