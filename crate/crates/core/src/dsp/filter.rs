use super::convolve::convolve;
use super::window::{kaiser_beta, kaiser_taps, lowpass_kernel};
use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

/// Stopband attenuation the low-pass design targets.
pub const LOWPASS_ATTENUATION_DB: f64 = 60.0;

/// Designs the linear-phase Kaiser low-pass used by [`lowpass`].
///
/// The passband extends to `cutoff_hz` and the stopband starts at
/// `cutoff_hz + transition_hz`; the -6 dB point sits midway, clamped to
/// Nyquist.
pub fn design_lowpass(sample_rate_hz: u32, cutoff_hz: f64, transition_hz: f64) -> Result<Vec<f64>> {
    let fs = sample_rate_hz as f64;
    let nyquist = fs / 2.0;
    if !(cutoff_hz > 0.0 && cutoff_hz < nyquist) {
        return Err(Error::InvalidCutoff(format!(
            "cutoff {cutoff_hz} Hz must lie in (0, {nyquist}) Hz"
        )));
    }
    if !(transition_hz > 0.0 && transition_hz.is_finite()) {
        return Err(Error::InvalidCutoff(format!(
            "transition width {transition_hz} Hz must be positive"
        )));
    }
    let edge = (cutoff_hz + transition_hz / 2.0).min(nyquist);
    let taps = kaiser_taps(LOWPASS_ATTENUATION_DB, transition_hz / fs);
    Ok(lowpass_kernel(
        taps,
        edge / fs,
        kaiser_beta(LOWPASS_ATTENUATION_DB),
    ))
}

/// Zero-phase application of an odd-length linear-phase FIR: the output has
/// the input's length and is shifted back by the group delay.
pub(crate) fn filter_aligned(x: &[f64], h: &[f64]) -> Vec<f64> {
    let delay = (h.len() - 1) / 2;
    let full = convolve(x, h);
    full[delay..delay + x.len()].to_vec()
}

/// Low-pass filters every channel of `audio`; see [`design_lowpass`].
pub fn lowpass(audio: &AudioBuffer, cutoff_hz: f64, transition_hz: f64) -> Result<AudioBuffer> {
    let h = design_lowpass(audio.sample_rate_hz(), cutoff_hz, transition_hz)?;
    if audio.is_empty() {
        return Ok(audio.clone());
    }
    audio.map_channels(|x| Ok(filter_aligned(x, &h)))
}
