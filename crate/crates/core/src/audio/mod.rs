//! Sampled audio carrier and WAV file I/O.

mod wav;

use std::fmt;
use std::str::FromStr;

pub use wav::{read_wav, read_wav_header, write_wav, WavEncoding, WavHeader, WriteStats};

use crate::error::{Error, Result};

/// Planar (channel-major) sampled waveform.
///
/// Samples are `f64`, nominally in `[-1, 1]`. A buffer is immutable once
/// built: every constructor checks that the rate and channel count are
/// positive and that all samples are finite.
#[derive(Clone, PartialEq)]
pub struct AudioBuffer {
    samples: Vec<f64>,
    frames: usize,
    channels: usize,
    sample_rate_hz: u32,
}

impl fmt::Debug for AudioBuffer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AudioBuffer")
            .field("frames", &self.frames)
            .field("channels", &self.channels)
            .field("sample_rate_hz", &self.sample_rate_hz)
            .finish()
    }
}

impl AudioBuffer {
    /// Builds a buffer from planar samples: channel 0 first, then channel 1, ...
    pub fn from_planar(samples: Vec<f64>, channels: usize, sample_rate_hz: u32) -> Result<Self> {
        if sample_rate_hz == 0 {
            return Err(Error::InvalidBuffer("sample rate must be positive".into()));
        }
        if channels == 0 {
            return Err(Error::InvalidBuffer(
                "channel count must be at least 1".into(),
            ));
        }
        if !samples.len().is_multiple_of(channels) {
            return Err(Error::InvalidBuffer(format!(
                "{} samples do not split evenly into {} channels",
                samples.len(),
                channels
            )));
        }
        if let Some(pos) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidBuffer(format!(
                "non-finite sample at index {pos}"
            )));
        }
        Ok(AudioBuffer {
            frames: samples.len() / channels,
            samples,
            channels,
            sample_rate_hz,
        })
    }

    pub fn mono(samples: Vec<f64>, sample_rate_hz: u32) -> Result<Self> {
        Self::from_planar(samples, 1, sample_rate_hz)
    }

    /// Builds a buffer from one vector per channel. All channels must have equal length.
    pub fn from_channels(channels: Vec<Vec<f64>>, sample_rate_hz: u32) -> Result<Self> {
        let count = channels.len();
        if count == 0 {
            return Err(Error::InvalidBuffer(
                "channel count must be at least 1".into(),
            ));
        }
        let frames = channels[0].len();
        if channels.iter().any(|c| c.len() != frames) {
            return Err(Error::InvalidBuffer("channels have unequal lengths".into()));
        }
        let samples = channels.into_iter().flatten().collect();
        Self::from_planar(samples, count, sample_rate_hz)
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn channel_count(&self) -> usize {
        self.channels
    }

    /// Samples per channel.
    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn is_empty(&self) -> bool {
        self.frames == 0
    }

    pub fn is_mono(&self) -> bool {
        self.channels == 1
    }

    pub fn duration_s(&self) -> f64 {
        self.frames as f64 / self.sample_rate_hz as f64
    }

    /// All samples, planar.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn channel(&self, index: usize) -> Result<&[f64]> {
        if index >= self.channels {
            return Err(Error::ChannelOutOfRange {
                index,
                channels: self.channels,
            });
        }
        Ok(&self.samples[index * self.frames..(index + 1) * self.frames])
    }

    pub fn channels(&self) -> impl Iterator<Item = &[f64]> {
        // chunks() panics on a zero size
        self.samples.chunks(self.frames.max(1)).take(self.channels)
    }

    /// The single channel of a mono buffer.
    pub fn mono_samples(&self) -> Result<&[f64]> {
        if self.channels != 1 {
            return Err(Error::NotMono(self.channels));
        }
        Ok(&self.samples)
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Applies `f` to every channel independently. All outputs must share one length.
    pub fn map_channels<F>(&self, mut f: F) -> Result<AudioBuffer>
    where
        F: FnMut(&[f64]) -> Result<Vec<f64>>,
    {
        let out = self.channels().map(&mut f).collect::<Result<Vec<_>>>()?;
        Self::from_channels(out, self.sample_rate_hz)
    }

    pub fn with_sample_rate(self, sample_rate_hz: u32) -> Result<Self> {
        Self::from_planar(self.samples, self.channels, sample_rate_hz)
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.abs()))
    }
}

/// How a multi-channel buffer is reduced to one channel before scoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChannelPolicy {
    #[default]
    Average,
    Channel(usize),
}

impl FromStr for ChannelPolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        if s == "average" {
            return Ok(ChannelPolicy::Average);
        }
        let index = s
            .strip_prefix("channel:")
            .or_else(|| s.strip_prefix("channel(").and_then(|r| r.strip_suffix(')')))
            .ok_or_else(|| format!("expected `average` or `channel:<i>`, got {s:?}"))?;
        index
            .parse()
            .map(ChannelPolicy::Channel)
            .map_err(|e| format!("bad channel index {index:?}: {e}"))
    }
}

impl fmt::Display for ChannelPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelPolicy::Average => f.write_str("average"),
            ChannelPolicy::Channel(i) => write!(f, "channel:{i}"),
        }
    }
}

/// Reduces `buffer` to a single channel.
pub fn to_mono(buffer: &AudioBuffer, policy: ChannelPolicy) -> Result<AudioBuffer> {
    let rate = buffer.sample_rate_hz();
    match policy {
        ChannelPolicy::Channel(i) => AudioBuffer::mono(buffer.channel(i)?.to_vec(), rate),
        ChannelPolicy::Average if buffer.is_mono() => Ok(buffer.clone()),
        ChannelPolicy::Average => {
            let n = buffer.channel_count() as f64;
            let mut acc = vec![0.0; buffer.frames()];
            for ch in buffer.channels() {
                for (a, s) in acc.iter_mut().zip(ch) {
                    *a += s;
                }
            }
            acc.iter_mut().for_each(|a| *a /= n);
            AudioBuffer::mono(acc, rate)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_buffers() {
        assert!(AudioBuffer::mono(vec![0.0], 0).is_err());
        assert!(AudioBuffer::from_planar(vec![0.0; 3], 2, 16000).is_err());
        assert!(AudioBuffer::mono(vec![f64::NAN], 16000).is_err());
        assert!(AudioBuffer::from_channels(vec![vec![0.0; 2], vec![0.0; 3]], 16000).is_err());
        assert!(AudioBuffer::from_channels(vec![], 16000).is_err());
    }

    #[test]
    fn mono_identity_for_every_policy() {
        let b = AudioBuffer::mono(vec![0.1, -0.2, 0.3], 8000).unwrap();
        assert_eq!(to_mono(&b, ChannelPolicy::Average).unwrap(), b);
        assert_eq!(to_mono(&b, ChannelPolicy::Channel(0)).unwrap(), b);
    }

    #[test]
    fn average_of_antiphase_channels_is_silence() {
        let x = vec![0.5, -0.25, 0.125, 1.0];
        let neg = x.iter().map(|v| -v).collect();
        let b = AudioBuffer::from_channels(vec![x, neg], 48000).unwrap();
        let m = to_mono(&b, ChannelPolicy::Average).unwrap();
        assert!(m.samples().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn channel_selection() {
        let b = AudioBuffer::from_channels(vec![vec![1.0, 2.0], vec![3.0, 4.0]], 48000).unwrap();
        let m = to_mono(&b, ChannelPolicy::Channel(1)).unwrap();
        assert_eq!(m.samples(), &[3.0, 4.0]);
        assert!(matches!(
            to_mono(&b, ChannelPolicy::Channel(2)),
            Err(Error::ChannelOutOfRange {
                index: 2,
                channels: 2
            })
        ));
    }

    #[test]
    fn policy_parsing() {
        assert_eq!(
            "average".parse::<ChannelPolicy>().unwrap(),
            ChannelPolicy::Average
        );
        assert_eq!(
            "channel:1".parse::<ChannelPolicy>().unwrap(),
            ChannelPolicy::Channel(1)
        );
        assert_eq!(
            "channel(0)".parse::<ChannelPolicy>().unwrap(),
            ChannelPolicy::Channel(0)
        );
        assert!("left".parse::<ChannelPolicy>().is_err());
    }
}
