//! Deterministic signal-processing primitives shared by the metrics and the
//! simulators. All arithmetic is `f64`; every function is pure and plans its
//! FFTs per call, so nothing here shares mutable state across threads.

mod convolve;
mod filter;
mod mel;
mod resample;
mod stft;
mod window;

pub use convolve::fft_convolve;
pub use filter::{design_lowpass, lowpass, LOWPASS_ATTENUATION_DB};
pub use mel::{hz_to_mel, mel_filterbank, mel_to_hz, MelFilterbank};
pub use resample::{resample, Resampler, RESAMPLE_ATTENUATION_DB};
pub use stft::{istft, stft, Spectrogram, StftConfig};
pub use window::WindowKind;

pub use rustfft::num_complex::Complex64;

pub(crate) use convolve::{convolve, xcorr_positive};
pub(crate) use stft::stft_samples;
#[cfg(test)]
pub(crate) use window::sinc;
