use super::window::{kaiser_beta, kaiser_taps, lowpass_kernel};
use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

/// Stopband attenuation of the anti-aliasing / anti-imaging filter.
pub const RESAMPLE_ATTENUATION_DB: f64 = 80.0;
/// Transition band, as a fraction of the lower Nyquist frequency, centred on it.
const TRANSITION_FRACTION: f64 = 0.2;

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Rational polyphase resampler for a fixed rate pair.
///
/// Conceptually the input is zero-stuffed by `up`, low-passed at the lower
/// of the two Nyquist rates and decimated by `down`; only the taps that hit
/// non-zero input samples are evaluated.
#[derive(Debug, Clone)]
pub struct Resampler {
    up: usize,
    down: usize,
    kernel: Vec<f64>,
}

impl Resampler {
    pub fn new(source_hz: u32, target_hz: u32) -> Result<Self> {
        if source_hz == 0 || target_hz == 0 {
            return Err(Error::InvalidBuffer("sample rates must be positive".into()));
        }
        let g = gcd(source_hz as u64, target_hz as u64);
        let up = (target_hz as u64 / g) as usize;
        let down = (source_hz as u64 / g) as usize;
        // Everything below in cycles per sample at the upsampled rate.
        let nyquist = 0.5 / up.max(down) as f64;
        let taps = kaiser_taps(RESAMPLE_ATTENUATION_DB, TRANSITION_FRACTION * nyquist);
        let mut kernel = lowpass_kernel(taps, nyquist, kaiser_beta(RESAMPLE_ATTENUATION_DB));
        kernel.iter_mut().for_each(|h| *h *= up as f64);
        Ok(Resampler { up, down, kernel })
    }

    pub fn ratio(&self) -> (usize, usize) {
        (self.up, self.down)
    }

    pub fn output_len(&self, input_len: usize) -> usize {
        // round(len · up / down), halves rounded up
        (2 * input_len * self.up + self.down) / (2 * self.down)
    }

    pub fn process(&self, x: &[f64]) -> Vec<f64> {
        if self.up == 1 && self.down == 1 {
            return x.to_vec();
        }
        let taps = self.kernel.len();
        let delay = (taps - 1) / 2;
        let out_len = self.output_len(x.len());
        let mut out = Vec::with_capacity(out_len);
        for m in 0..out_len {
            let t = m * self.down + delay;
            let mut n = (t / self.up) as isize;
            let mut k = t % self.up;
            let mut acc = 0.0;
            while k < taps && n >= 0 {
                if let Some(v) = x.get(n as usize) {
                    acc += self.kernel[k] * v;
                }
                k += self.up;
                n -= 1;
            }
            out.push(acc);
        }
        out
    }
}

/// Resamples every channel of `audio` to `target_hz`.
///
/// Output length is `round(len · target / source)`. The filter is linear
/// phase with its delay removed, so output sample `m` lines up with input
/// time `m / target_hz`.
pub fn resample(audio: &AudioBuffer, target_hz: u32) -> Result<AudioBuffer> {
    if target_hz == audio.sample_rate_hz() {
        return Ok(audio.clone());
    }
    let r = Resampler::new(audio.sample_rate_hz(), target_hz)?;
    let channels: Vec<Vec<f64>> = audio.channels().map(|c| r.process(c)).collect();
    if audio.is_empty() {
        return AudioBuffer::from_planar(Vec::new(), audio.channel_count(), target_hz);
    }
    AudioBuffer::from_channels(channels, target_hz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ratios_reduce() {
        assert_eq!(Resampler::new(48000, 16000).unwrap().ratio(), (1, 3));
        assert_eq!(Resampler::new(44100, 48000).unwrap().ratio(), (160, 147));
        assert_eq!(Resampler::new(16000, 10000).unwrap().ratio(), (5, 8));
    }

    #[test]
    fn output_lengths() {
        let r = Resampler::new(48000, 16000).unwrap();
        assert_eq!(r.output_len(48000), 16000);
        assert_eq!(r.output_len(10), 3);
        assert_eq!(r.output_len(11), 4);
        let r = Resampler::new(16000, 48000).unwrap();
        assert_eq!(r.output_len(7), 21);
    }

    #[test]
    fn same_rate_is_identity() {
        let a = AudioBuffer::mono(vec![0.1, 0.2, -0.3], 22050).unwrap();
        assert_eq!(resample(&a, 22050).unwrap(), a);
    }

    #[test]
    fn downsampled_sine_matches_analytic() {
        let x: Vec<f64> = (0..48000)
            .map(|i| (2.0 * PI * 1000.0 * i as f64 / 48000.0).sin())
            .collect();
        let y = resample(&AudioBuffer::mono(x, 48000).unwrap(), 16000).unwrap();
        assert_eq!(y.frames(), 16000);
        let margin = 200;
        let (mut sig, mut err) = (0.0, 0.0);
        for (m, v) in y
            .samples()
            .iter()
            .enumerate()
            .take(16000 - margin)
            .skip(margin)
        {
            let want = (2.0 * PI * 1000.0 * m as f64 / 16000.0).sin();
            sig += want * want;
            err += (v - want) * (v - want);
        }
        let snr = 10.0 * (sig / err).log10();
        assert!(snr >= 60.0, "{snr}");
    }

    #[test]
    fn multichannel_and_empty() {
        let a = AudioBuffer::from_channels(vec![vec![0.0; 300], vec![0.5; 300]], 48000).unwrap();
        let b = resample(&a, 16000).unwrap();
        assert_eq!((b.channel_count(), b.frames()), (2, 100));
        let e = AudioBuffer::mono(vec![], 48000).unwrap();
        assert_eq!(resample(&e, 16000).unwrap().frames(), 0);
    }
}
