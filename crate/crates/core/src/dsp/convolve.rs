use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

/// Full linear convolution of two real sequences via zero-padded FFT.
pub(crate) fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let out_len = a.len() + b.len() - 1;
    let n = out_len.next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);

    let mut fa: Vec<Complex64> = a.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fa.resize(n, Complex64::new(0.0, 0.0));
    let mut fb: Vec<Complex64> = b.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fb.resize(n, Complex64::new(0.0, 0.0));
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    inv.process(&mut fa);
    let scale = 1.0 / n as f64;
    fa[..out_len].iter().map(|c| c.re * scale).collect()
}

/// Cross-correlation `r[k] = Σ_u a[u] · b[u + k]` for `k` in `0..max_lag`.
pub(crate) fn xcorr_positive(a: &[f64], b: &[f64], max_lag: usize) -> Vec<f64> {
    let rev: Vec<f64> = a.iter().rev().cloned().collect();
    let full = convolve(&rev, b);
    // full[j] = Σ_u a[u] b[j - (len_a - 1) + u]
    let zero = a.len() - 1;
    (0..max_lag)
        .map(|k| full.get(zero + k).copied().unwrap_or(0.0))
        .collect()
}

/// Full linear convolution of a mono signal with `kernel`; output length is
/// `len(signal) + len(kernel) - 1`.
pub fn fft_convolve(signal: &AudioBuffer, kernel: &[f64]) -> Result<AudioBuffer> {
    let x = signal.mono_samples()?;
    if x.is_empty() || kernel.is_empty() {
        return Err(Error::EmptyInput);
    }
    if kernel.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidBuffer(
            "kernel contains non-finite values".into(),
        ));
    }
    AudioBuffer::mono(convolve(x, kernel), signal.sample_rate_hz())
}
