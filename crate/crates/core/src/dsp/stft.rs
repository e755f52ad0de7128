use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::window::WindowKind;
use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

/// Short-time Fourier analysis parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StftConfig {
    fft_size: usize,
    win_length: usize,
    hop_length: usize,
    window: WindowKind,
    center: bool,
}

impl StftConfig {
    pub fn new(
        fft_size: usize,
        win_length: usize,
        hop_length: usize,
        window: WindowKind,
        center: bool,
    ) -> Result<Self> {
        if fft_size == 0 || !fft_size.is_power_of_two() {
            return Err(Error::InvalidStftConfig(format!(
                "fft_size {fft_size} is not a power of two"
            )));
        }
        if win_length == 0 || win_length > fft_size {
            return Err(Error::InvalidStftConfig(format!(
                "win_length {win_length} must be in 1..={fft_size}"
            )));
        }
        if hop_length == 0 || hop_length > win_length {
            return Err(Error::InvalidStftConfig(format!(
                "hop_length {hop_length} must be in 1..={win_length}"
            )));
        }
        Ok(StftConfig {
            fft_size,
            win_length,
            hop_length,
            window,
            center,
        })
    }

    /// Metric defaults: 512/512/256 hann below 32 kHz, 2048/2048/512 hann at
    /// 32 kHz and above. Both are centered.
    pub fn for_sample_rate(sample_rate_hz: u32) -> Self {
        let (n, hop) = if sample_rate_hz >= 32_000 {
            (2048, 512)
        } else {
            (512, 256)
        };
        StftConfig {
            fft_size: n,
            win_length: n,
            hop_length: hop,
            window: WindowKind::Hann,
            center: true,
        }
    }

    pub fn fft_size(&self) -> usize {
        self.fft_size
    }

    pub fn win_length(&self) -> usize {
        self.win_length
    }

    pub fn hop_length(&self) -> usize {
        self.hop_length
    }

    pub fn window(&self) -> WindowKind {
        self.window
    }

    pub fn center(&self) -> bool {
        self.center
    }

    pub fn n_bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    /// Checks that overlapped squared windows never vanish, which is what
    /// weighted overlap-add inversion needs. Hann at 50% or 75% overlap
    /// passes; hann with `hop == win` does not.
    pub fn check_cola(&self) -> Result<()> {
        let w = self.window.generate(self.win_length);
        let mut acc = vec![0.0; self.hop_length];
        for (n, v) in w.iter().enumerate() {
            acc[n % self.hop_length] += v * v;
        }
        let max = acc.iter().cloned().fold(0.0, f64::max);
        let min = acc.iter().cloned().fold(f64::INFINITY, f64::min);
        if max <= 0.0 || min < 1e-3 * max {
            return Err(Error::NonColaConfig(format!(
                "{} window of {} samples with hop {} leaves gaps in overlap-add coverage",
                self.window, self.win_length, self.hop_length
            )));
        }
        Ok(())
    }

    fn pad(&self) -> usize {
        if self.center {
            self.fft_size / 2
        } else {
            0
        }
    }
}

/// Complex one-sided STFT, frames × bins, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    data: Vec<Complex64>,
    n_frames: usize,
    config: StftConfig,
    sample_rate_hz: u32,
    signal_len: usize,
}

impl Spectrogram {
    /// Assembles a spectrogram from raw frames (e.g. after masking).
    pub fn from_frames(
        data: Vec<Complex64>,
        config: StftConfig,
        sample_rate_hz: u32,
        signal_len: usize,
    ) -> Result<Self> {
        let bins = config.n_bins();
        if !data.len().is_multiple_of(bins) {
            return Err(Error::InvalidStftConfig(format!(
                "{} values do not form rows of {bins} bins",
                data.len()
            )));
        }
        if data.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidBuffer(
                "spectrogram contains non-finite values".into(),
            ));
        }
        Ok(Spectrogram {
            n_frames: data.len() / bins,
            data,
            config,
            sample_rate_hz,
            signal_len,
        })
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn n_bins(&self) -> usize {
        self.config.n_bins()
    }

    pub fn config(&self) -> &StftConfig {
        &self.config
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    /// Length of the analysed signal in samples.
    pub fn signal_len(&self) -> usize {
        self.signal_len
    }

    pub fn frame(&self, t: usize) -> &[Complex64] {
        let b = self.n_bins();
        &self.data[t * b..(t + 1) * b]
    }

    pub fn frames(&self) -> impl Iterator<Item = &[Complex64]> {
        self.data.chunks(self.n_bins())
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// |X|² per frame, row-major.
    pub fn power(&self) -> Vec<f64> {
        self.data.iter().map(|c| c.norm_sqr()).collect()
    }
}

/// Index into `x` with symmetric reflection (no edge repeat) for any offset.
fn reflect_index(i: isize, len: usize) -> usize {
    if len == 1 {
        return 0;
    }
    let period = 2 * (len as isize - 1);
    let mut k = i.rem_euclid(period);
    if k >= len as isize {
        k = period - k;
    }
    k as usize
}

fn padded_signal(x: &[f64], config: &StftConfig) -> Vec<f64> {
    let pad = config.pad();
    let mut out: Vec<f64> = if pad == 0 {
        x.to_vec()
    } else {
        (-(pad as isize)..(x.len() + pad) as isize)
            .map(|i| x[reflect_index(i, x.len())])
            .collect()
    };
    if out.len() < config.win_length {
        out.resize(config.win_length, 0.0);
    }
    out
}

fn stft_slice(x: &[f64], config: &StftConfig, sample_rate_hz: u32) -> Result<Spectrogram> {
    if x.is_empty() {
        return Err(Error::EmptySignal);
    }
    let padded = padded_signal(x, config);
    let n_frames = 1 + (padded.len() - config.win_length) / config.hop_length;
    let window = config.window.generate(config.win_length);
    let bins = config.n_bins();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(config.fft_size);
    let mut buf = vec![Complex64::new(0.0, 0.0); config.fft_size];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut data = Vec::with_capacity(n_frames * bins);
    for t in 0..n_frames {
        let start = t * config.hop_length;
        buf.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        for (n, w) in window.iter().enumerate() {
            buf[n].re = padded[start + n] * w;
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        data.extend_from_slice(&buf[..bins]);
    }
    Ok(Spectrogram {
        data,
        n_frames,
        config: *config,
        sample_rate_hz,
        signal_len: x.len(),
    })
}

/// Forward STFT of a mono signal.
///
/// Frame `t` holds the DFT of `window · x[t·hop .. t·hop + win]` (after
/// optional reflect padding by `fft_size / 2`), zero-extended to `fft_size`.
pub fn stft(audio: &AudioBuffer, config: &StftConfig) -> Result<Spectrogram> {
    stft_slice(audio.mono_samples()?, config, audio.sample_rate_hz())
}

pub(crate) fn stft_samples(
    x: &[f64],
    config: &StftConfig,
    sample_rate_hz: u32,
) -> Result<Spectrogram> {
    stft_slice(x, config, sample_rate_hz)
}

/// Inverse STFT by weighted overlap-add, returning `spec.signal_len()` samples.
pub fn istft(spec: &Spectrogram) -> Result<AudioBuffer> {
    let config = spec.config;
    config.check_cola()?;
    let window = config.window.generate(config.win_length);
    let n = config.fft_size;
    let bins = config.n_bins();
    let total = (spec.n_frames - 1) * config.hop_length + config.win_length;
    let mut out = vec![0.0; total];
    let mut norm = vec![0.0; total];
    let ifft = FftPlanner::<f64>::new().plan_fft_inverse(n);
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); ifft.get_inplace_scratch_len()];
    for (t, frame) in spec.frames().enumerate() {
        buf[..bins].copy_from_slice(frame);
        // DC and Nyquist of a real signal carry no imaginary part.
        buf[0].im = 0.0;
        buf[n / 2].im = 0.0;
        for k in 1..n / 2 {
            buf[n - k] = frame[k].conj();
        }
        ifft.process_with_scratch(&mut buf, &mut scratch);
        let start = t * config.hop_length;
        for (i, w) in window.iter().enumerate() {
            out[start + i] += buf[i].re / n as f64 * w;
            norm[start + i] += w * w;
        }
    }
    let pad = config.pad();
    let len = spec.signal_len;
    let samples = (pad..pad + len)
        .map(|i| match (out.get(i), norm.get(i)) {
            (Some(&v), Some(&w)) if w > 1e-10 => v / w,
            _ => 0.0,
        })
        .collect();
    AudioBuffer::mono(samples, spec.sample_rate_hz)
}
