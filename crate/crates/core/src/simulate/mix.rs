use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::SimRng;
use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

pub const DEFAULT_PEAK_TARGET: f64 = 0.9;
pub const FLAG_CLIPPED: &str = "clipped";

/// Output level policy applied after mixing. Serialized as `"none"` or
/// `"peak_norm:<target>"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GainPolicy {
    /// Rescale every output by one common factor when the mixture peak
    /// exceeds the target.
    PeakNorm(f64),
    None,
}

impl Default for GainPolicy {
    fn default() -> Self {
        GainPolicy::PeakNorm(DEFAULT_PEAK_TARGET)
    }
}

impl fmt::Display for GainPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GainPolicy::PeakNorm(t) => write!(f, "peak_norm:{t}"),
            GainPolicy::None => f.write_str("none"),
        }
    }
}

impl FromStr for GainPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "none" {
            return Ok(GainPolicy::None);
        }
        if s == "peak_norm" {
            return Ok(GainPolicy::default());
        }
        let target = s
            .strip_prefix("peak_norm:")
            .or_else(|| {
                s.strip_prefix("peak_norm(")
                    .and_then(|r| r.strip_suffix(')'))
            })
            .and_then(|t| t.parse::<f64>().ok())
            .ok_or_else(|| Error::InvalidSpec(format!("unknown gain policy {s:?}")))?;
        if !(target > 0.0 && target <= 1.0) {
            return Err(Error::InvalidSpec(format!(
                "peak target must be in (0, 1], got {target}"
            )));
        }
        Ok(GainPolicy::PeakNorm(target))
    }
}

impl Serialize for GainPolicy {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GainPolicy {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A mixture with the components it was built from, all at one scale.
#[derive(Debug, Clone)]
pub struct Mixture {
    pub mixture: AudioBuffer,
    pub speech: AudioBuffer,
    pub noise: AudioBuffer,
    /// Noise gain applied before the gain policy.
    pub noise_gain: f64,
    /// Common factor applied by the gain policy (1 when untouched).
    pub output_gain: f64,
    pub flags: Vec<&'static str>,
}

pub(crate) fn energy(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Cuts or loops `noise` to `len` samples, starting at a seeded offset.
pub(crate) fn fit_noise(noise: &[f64], len: usize, rng: &mut SimRng) -> Vec<f64> {
    if noise.len() >= len {
        let start = rng.index(noise.len() - len + 1);
        noise[start..start + len].to_vec()
    } else {
        let start = rng.index(noise.len());
        (0..len).map(|i| noise[(start + i) % noise.len()]).collect()
    }
}

/// Gain `g` with `10·log10(reference_energy / (g²·noise_energy)) = snr_db`.
pub(crate) fn gain_for_snr(reference_energy: f64, noise_energy: f64, snr_db: f64) -> f64 {
    (reference_energy / (noise_energy * 10f64.powf(snr_db / 10.0))).sqrt()
}

/// One common factor for every signal in `outputs` under `policy`, plus
/// flags. Peak normalization brings the first signal (the mixture) to the
/// target; if a component still exceeds full scale, the factor shrinks
/// further until it sits at the target too.
pub(crate) fn apply_policy(
    outputs: &mut [&mut Vec<f64>],
    policy: GainPolicy,
) -> (f64, Vec<&'static str>) {
    let peak = |x: &[f64]| x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    match policy {
        GainPolicy::PeakNorm(target) => {
            let mix_peak = peak(outputs[0]);
            let mut g = if mix_peak > target {
                target / mix_peak
            } else {
                1.0
            };
            let comp_peak = outputs[1..].iter().map(|x| peak(x)).fold(0.0, f64::max);
            if comp_peak * g > 1.0 {
                g = target / comp_peak;
            }
            if g != 1.0 {
                for x in outputs.iter_mut() {
                    x.iter_mut().for_each(|v| *v *= g);
                }
            }
            (g, Vec::new())
        }
        GainPolicy::None => {
            let clipped = outputs.iter().any(|x| peak(x) > 1.0);
            (
                1.0,
                if clipped {
                    vec![FLAG_CLIPPED]
                } else {
                    Vec::new()
                },
            )
        }
    }
}

/// Mixes `noise` into `speech` at exactly `snr_db`.
///
/// The noise is trimmed or looped to the speech length from a seeded start
/// offset, then scaled so that `10·log10(Σs² / Σn²) = snr_db` over the full
/// length. The gain policy rescales mixture and components together, so the
/// ratio survives it.
pub fn mix_at_snr(
    speech: &AudioBuffer,
    noise: &AudioBuffer,
    snr_db: f64,
    policy: GainPolicy,
    rng: &mut SimRng,
) -> Result<Mixture> {
    if speech.sample_rate_hz() != noise.sample_rate_hz() {
        return Err(Error::RateMismatch {
            reference: speech.sample_rate_hz(),
            estimate: noise.sample_rate_hz(),
        });
    }
    if !snr_db.is_finite() {
        return Err(Error::InvalidSpec(format!(
            "SNR must be finite, got {snr_db}"
        )));
    }
    let s = speech.mono_samples()?;
    let n = noise.mono_samples()?;
    let es = energy(s);
    if es == 0.0 {
        return Err(Error::SilentSpeech);
    }
    if energy(n) == 0.0 {
        return Err(Error::SilentNoise);
    }
    let mut n = fit_noise(n, s.len(), rng);
    let en = energy(&n);
    if en == 0.0 {
        return Err(Error::SilentNoise);
    }
    let noise_gain = gain_for_snr(es, en, snr_db);
    n.iter_mut().for_each(|v| *v *= noise_gain);
    let mut s = s.to_vec();
    let mut mix: Vec<f64> = s.iter().zip(&n).map(|(a, b)| a + b).collect();
    let (output_gain, flags) = apply_policy(&mut [&mut mix, &mut s, &mut n], policy);
    let fs = speech.sample_rate_hz();
    Ok(Mixture {
        mixture: AudioBuffer::mono(mix, fs)?,
        speech: AudioBuffer::mono(s, fs)?,
        noise: AudioBuffer::mono(n, fs)?,
        noise_gain,
        output_gain,
        flags,
    })
}
