use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::mix::{apply_policy, energy, fit_noise, gain_for_snr};
use super::{
    derive_seed, generate_rir, mix_at_snr, MixtureKind, MixtureSpec, RoomSpec, SimRng,
    RNG_ALGORITHM,
};
use crate::audio::AudioBuffer;
use crate::dsp::{convolve, lowpass, resample};
use crate::error::{Error, Result};

pub const DEFAULT_REVERB_FRACTION: f64 = 0.3;
pub const ENHANCEMENT_SNR_RANGE_DB: (f64, f64) = (0.0, 15.0);
pub const SPEAKER_SNR_RANGE_DB: (f64, f64) = (0.0, 5.0);
pub const SEPARATION_NOISE_SNR_RANGE_DB: (f64, f64) = (-5.0, 15.0);
pub const SR_CUTOFF_RANGE_HZ: (f64, f64) = (8000.0, 16000.0);
pub const SR_RATE_HZ: u32 = 48_000;
/// Low-pass transition band of super-resolution inputs.
pub const SR_TRANSITION_HZ: f64 = 400.0;
/// Half-width of the window kept around the main peak for direct-path targets.
const DIRECT_PATH_HALF_S: f64 = 0.0025;

/// Loads audio assets by id.
pub trait AssetSource: Sync {
    fn load(&self, id: &str) -> Result<AudioBuffer>;
}

impl AssetSource for BTreeMap<String, AudioBuffer> {
    fn load(&self, id: &str) -> Result<AudioBuffer> {
        self.get(id)
            .cloned()
            .ok_or_else(|| Error::AssetNotFound(id.to_string()))
    }
}

impl AssetSource for HashMap<String, AudioBuffer> {
    fn load(&self, id: &str) -> Result<AudioBuffer> {
        self.get(id)
            .cloned()
            .ok_or_else(|| Error::AssetNotFound(id.to_string()))
    }
}

/// Training target for reverberant enhancement pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetPolicy {
    /// The reverberant speech that went into the mixture (denoising only).
    #[default]
    Reverberant,
    /// The dry source speech (denoising and dereverberation).
    Dry,
    /// The speech convolved with the direct path of the RIR only.
    DirectPath,
}

impl fmt::Display for TargetPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TargetPolicy::Reverberant => "reverberant",
            TargetPolicy::Dry => "dry",
            TargetPolicy::DirectPath => "direct_path",
        })
    }
}

impl FromStr for TargetPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reverberant" => Ok(TargetPolicy::Reverberant),
            "dry" => Ok(TargetPolicy::Dry),
            "direct_path" => Ok(TargetPolicy::DirectPath),
            other => Err(Error::InvalidRecipe(format!(
                "unknown target policy {other:?}"
            ))),
        }
    }
}

/// Probabilities of the 16 kHz and 8 kHz band-limiting branches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandwidthAugment {
    pub p16: f64,
    pub p8: f64,
}

impl Default for BandwidthAugment {
    fn default() -> Self {
        BandwidthAugment {
            p16: 0.10,
            p8: 0.05,
        }
    }
}

/// Realization settings that are not part of an individual spec.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizeOptions {
    pub target: TargetPolicy,
    /// Probability of reverberation when a spec leaves it open.
    pub reverb_fraction: f64,
    pub bandwidth: Option<BandwidthAugment>,
}

impl Default for RealizeOptions {
    fn default() -> Self {
        RealizeOptions {
            target: TargetPolicy::default(),
            reverb_fraction: DEFAULT_REVERB_FRACTION,
            bandwidth: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EnhancementPair {
    pub noisy: AudioBuffer,
    pub clean: AudioBuffer,
    pub spec: MixtureSpec,
    pub flags: Vec<&'static str>,
}

#[derive(Debug, Clone)]
pub struct SeparationMixture {
    pub mixture: AudioBuffer,
    pub ref_1: AudioBuffer,
    pub ref_2: AudioBuffer,
    pub spec: MixtureSpec,
    pub flags: Vec<&'static str>,
}

#[derive(Debug, Clone)]
pub struct SrPair {
    pub lr_input: AudioBuffer,
    pub hr_target: AudioBuffer,
}

/// A realized spec: outputs keyed by directory name, in [`MixtureKind::output_dirs`] order.
#[derive(Debug, Clone)]
pub struct Realized {
    pub spec: MixtureSpec,
    pub outputs: Vec<(&'static str, AudioBuffer)>,
    pub flags: Vec<&'static str>,
}

fn load_mono(assets: &dyn AssetSource, id: &str) -> Result<AudioBuffer> {
    let a = assets.load(id)?;
    if a.is_mono() {
        Ok(a)
    } else {
        crate::audio::to_mono(&a, Default::default())
    }
}

fn load_at_rate(assets: &dyn AssetSource, id: &str, rate: u32) -> Result<AudioBuffer> {
    resample(&load_mono(assets, id)?, rate)
}

fn draw(value: Option<f64>, range: (f64, f64), rng: &mut SimRng) -> f64 {
    value.unwrap_or_else(|| rng.uniform_range(range.0, range.1))
}

fn reverberate(speech: &[f64], rir: &[f64]) -> Vec<f64> {
    let mut y = convolve(speech, rir);
    y.truncate(speech.len());
    y
}

/// `rir` with everything outside a short window around its main peak zeroed.
fn direct_path(rir: &[f64], sample_rate_hz: u32) -> Vec<f64> {
    let peak = (0..rir.len())
        .max_by(|&a, &b| rir[a].abs().total_cmp(&rir[b].abs()))
        .unwrap_or(0);
    let half = (DIRECT_PATH_HALF_S * sample_rate_hz as f64).round() as usize;
    let (lo, hi) = (peak.saturating_sub(half), (peak + half + 1).min(rir.len()));
    let mut out = vec![0.0; rir.len()];
    out[lo..hi].copy_from_slice(&rir[lo..hi]);
    out
}

/// Noisy / clean pair for speech enhancement.
///
/// Draw order from `spec.seed`: reverberation (when unset), noise SNR in
/// [0, 15] dB (when unset), a random room (when reverberant without
/// `rir_id`), then the noise offset. The SNR is measured against the speech
/// that enters the mixture, reverberant or not. Noise and RIR assets are
/// resampled to the speech rate.
pub fn make_enhancement_pair(
    spec: &MixtureSpec,
    assets: &dyn AssetSource,
    opts: &RealizeOptions,
) -> Result<EnhancementPair> {
    let mut spec = spec.clone();
    spec.kind = MixtureKind::Enhancement;
    spec.validate()?;
    let mut rng = SimRng::new(spec.seed);
    let speech = load_mono(assets, &spec.speech_ids[0])?;
    let fs = speech.sample_rate_hz();
    let noise_id = spec.noise_id.clone().expect("validated");
    let noise = load_at_rate(assets, &noise_id, fs)?;

    let reverberant = spec
        .reverberant
        .unwrap_or_else(|| rng.bernoulli(opts.reverb_fraction));
    let snr = draw(spec.snr_noise_db, ENHANCEMENT_SNR_RANGE_DB, &mut rng);
    spec.reverberant = Some(reverberant);
    spec.snr_noise_db = Some(snr);

    let dry = speech.samples();
    let (mixed_speech, target) = if reverberant {
        let rir = match &spec.rir_id {
            Some(id) => load_at_rate(assets, id, fs)?.into_samples(),
            None => {
                let room = RoomSpec::sample(&mut rng, fs);
                spec.extra.insert(
                    "room".into(),
                    serde_json::to_value(&room).expect("room serializes"),
                );
                generate_rir(&room)?.into_samples()
            }
        };
        let wet = reverberate(dry, &rir);
        let target = match opts.target {
            TargetPolicy::Reverberant => wet.clone(),
            TargetPolicy::Dry => dry.to_vec(),
            TargetPolicy::DirectPath => reverberate(dry, &direct_path(&rir, fs)),
        };
        spec.extra
            .insert("target".into(), json!(opts.target.to_string()));
        (wet, target)
    } else {
        (dry.to_vec(), dry.to_vec())
    };

    let m = mix_at_snr(
        &AudioBuffer::mono(mixed_speech, fs)?,
        &noise,
        snr,
        spec.gain_policy,
        &mut rng,
    )?;
    let clean: Vec<f64> = target.iter().map(|v| v * m.output_gain).collect();
    spec.extra.insert("rng".into(), json!(RNG_ALGORITHM));
    Ok(EnhancementPair {
        noisy: m.mixture,
        clean: AudioBuffer::mono(clean, fs)?,
        spec,
        flags: m.flags,
    })
}

/// Two-speaker mixture with references scaled as they appear in it.
///
/// Draw order from `spec.seed`: inter-speaker SNR in [0, 5] dB, noise SNR in
/// [−5, 15] dB (when a noise id is present), the padding offset of the
/// shorter utterance, then the noise offset. Speaker 2 is scaled to the
/// speaker SNR; noise is scaled against the louder scaled speaker.
pub fn make_separation_mixture(
    spec: &MixtureSpec,
    assets: &dyn AssetSource,
) -> Result<SeparationMixture> {
    let mut spec = spec.clone();
    spec.kind = MixtureKind::Separation;
    spec.validate()?;
    if spec.speech_ids[0] == spec.speech_ids[1] {
        return Err(Error::SameSpeaker(spec.speech_ids[0].clone()));
    }
    if spec.reverberant == Some(true) {
        return Err(Error::InvalidSpec(format!(
            "{}: reverberant separation mixtures are not supported",
            spec.utterance_id
        )));
    }
    let mut rng = SimRng::new(spec.seed);
    let a = load_mono(assets, &spec.speech_ids[0])?;
    let fs = a.sample_rate_hz();
    let b = load_at_rate(assets, &spec.speech_ids[1], fs)?;
    let noise = spec
        .noise_id
        .as_deref()
        .map(|id| load_at_rate(assets, id, fs))
        .transpose()?;

    let snr_speech = draw(spec.snr_speech_db, SPEAKER_SNR_RANGE_DB, &mut rng);
    let snr_noise = noise
        .as_ref()
        .map(|_| draw(spec.snr_noise_db, SEPARATION_NOISE_SNR_RANGE_DB, &mut rng));
    spec.snr_speech_db = Some(snr_speech);
    spec.snr_noise_db = snr_noise;
    spec.reverberant = Some(false);

    let (mut s1, mut s2) = (a.into_samples(), b.into_samples());
    let len = s1.len().max(s2.len());
    let shorter = if s1.len() < s2.len() {
        &mut s1
    } else {
        &mut s2
    };
    let offset = rng.index(len - shorter.len() + 1);
    let mut padded = vec![0.0; len];
    padded[offset..offset + shorter.len()].copy_from_slice(shorter);
    *shorter = padded;
    spec.extra.insert("pad_offset".into(), json!(offset));

    let (e1, e2) = (energy(&s1), energy(&s2));
    if e1 == 0.0 || e2 == 0.0 {
        return Err(Error::SilentSpeech);
    }
    let g2 = gain_for_snr(e1, e2, snr_speech);
    s2.iter_mut().for_each(|v| *v *= g2);
    let louder = e1.max(g2 * g2 * e2);

    let mut n = match (&noise, snr_noise) {
        (Some(noise), Some(snr)) => {
            let raw = noise.samples();
            if energy(raw) == 0.0 {
                return Err(Error::SilentNoise);
            }
            let mut n = fit_noise(raw, len, &mut rng);
            let en = energy(&n);
            if en == 0.0 {
                return Err(Error::SilentNoise);
            }
            let g = gain_for_snr(louder, en, snr);
            n.iter_mut().for_each(|v| *v *= g);
            n
        }
        _ => vec![0.0; len],
    };
    let mut mix: Vec<f64> = (0..len).map(|i| s1[i] + s2[i] + n[i]).collect();
    let (_, flags) = apply_policy(&mut [&mut mix, &mut s1, &mut s2, &mut n], spec.gain_policy);
    spec.extra.insert("rng".into(), json!(RNG_ALGORITHM));
    Ok(SeparationMixture {
        mixture: AudioBuffer::mono(mix, fs)?,
        ref_1: AudioBuffer::mono(s1, fs)?,
        ref_2: AudioBuffer::mono(s2, fs)?,
        spec,
        flags,
    })
}

/// Super-resolution pair: `hr` low-passed at `cutoff_hz` (kept at 48 kHz)
/// as input, `hr` unchanged as target.
pub fn make_sr_pair(hr: &AudioBuffer, cutoff_hz: f64) -> Result<SrPair> {
    if hr.sample_rate_hz() != SR_RATE_HZ {
        return Err(Error::WrongRate {
            expected: SR_RATE_HZ,
            actual: hr.sample_rate_hz(),
        });
    }
    let (lo, hi) = SR_CUTOFF_RANGE_HZ;
    if !(lo..=hi).contains(&cutoff_hz) {
        return Err(Error::InvalidCutoff(format!(
            "super-resolution cutoff must lie in [{lo}, {hi}] Hz, got {cutoff_hz}"
        )));
    }
    Ok(SrPair {
        lr_input: lowpass(hr, cutoff_hz, SR_TRANSITION_HZ)?,
        hr_target: hr.clone(),
    })
}

/// Which band-limiting branch a bandwidth-augmentation seed selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandwidthBranch {
    Full,
    Via16k,
    Via8k,
}

impl BandwidthBranch {
    /// One uniform draw `u` from `seed`: `u < p16` → 16 kHz, `u < p16 + p8` → 8 kHz.
    pub fn draw(seed: u64, p16: f64, p8: f64) -> Result<Self> {
        if !(p16 >= 0.0 && p8 >= 0.0 && p16 + p8 <= 1.0) {
            return Err(Error::InvalidSpec(format!(
                "bandwidth probabilities must be non-negative with p16 + p8 <= 1, got {p16}, {p8}"
            )));
        }
        let u = SimRng::new(seed).uniform();
        Ok(if u < p16 {
            BandwidthBranch::Via16k
        } else if u < p16 + p8 {
            BandwidthBranch::Via8k
        } else {
            BandwidthBranch::Full
        })
    }

    pub fn label(self) -> &'static str {
        match self {
            BandwidthBranch::Full => "48k",
            BandwidthBranch::Via16k => "16k",
            BandwidthBranch::Via8k => "8k",
        }
    }

    /// Applies the branch to 48 kHz audio; the length is preserved.
    pub fn apply(self, audio: &AudioBuffer) -> Result<AudioBuffer> {
        if audio.sample_rate_hz() != SR_RATE_HZ {
            return Err(Error::WrongRate {
                expected: SR_RATE_HZ,
                actual: audio.sample_rate_hz(),
            });
        }
        let via = match self {
            BandwidthBranch::Full => return Ok(audio.clone()),
            BandwidthBranch::Via16k => 16_000,
            BandwidthBranch::Via8k => 8_000,
        };
        let back = resample(&resample(audio, via)?, SR_RATE_HZ)?;
        let frames = audio.frames();
        back.map_channels(|ch| {
            let mut v = ch.to_vec();
            v.resize(frames, 0.0);
            Ok(v)
        })
    }
}

/// Band-limits 48 kHz audio through 16 kHz with probability `p16`, through
/// 8 kHz with probability `p8`, and leaves it untouched otherwise.
pub fn bandwidth_augment(audio: &AudioBuffer, seed: u64, p16: f64, p8: f64) -> Result<AudioBuffer> {
    BandwidthBranch::draw(seed, p16, p8)?.apply(audio)
}

/// Realizes any spec kind, then applies bandwidth augmentation (same
/// branch for every output) when configured.
pub fn realize(
    spec: &MixtureSpec,
    assets: &dyn AssetSource,
    opts: &RealizeOptions,
) -> Result<Realized> {
    let mut r = match spec.kind {
        MixtureKind::Enhancement => {
            let p = make_enhancement_pair(spec, assets, opts)?;
            Realized {
                spec: p.spec,
                outputs: vec![("noisy", p.noisy), ("clean", p.clean)],
                flags: p.flags,
            }
        }
        MixtureKind::Separation => {
            let m = make_separation_mixture(spec, assets)?;
            Realized {
                spec: m.spec,
                outputs: vec![("mix", m.mixture), ("s1", m.ref_1), ("s2", m.ref_2)],
                flags: m.flags,
            }
        }
        MixtureKind::SrPair => {
            let mut spec = spec.clone();
            spec.validate()?;
            let hr = load_mono(assets, &spec.speech_ids[0])?;
            let cutoff = draw(
                spec.cutoff_hz,
                SR_CUTOFF_RANGE_HZ,
                &mut SimRng::new(spec.seed),
            );
            let pair = make_sr_pair(&hr, cutoff)?;
            spec.cutoff_hz = Some(cutoff);
            spec.extra.insert("rng".into(), json!(RNG_ALGORITHM));
            Realized {
                spec,
                outputs: vec![("noisy", pair.lr_input), ("clean", pair.hr_target)],
                flags: Vec::new(),
            }
        }
    };
    if let Some(bw) = opts.bandwidth {
        let branch = BandwidthBranch::draw(derive_seed(spec.seed, 1), bw.p16, bw.p8)?;
        for (_, audio) in r.outputs.iter_mut() {
            *audio = branch.apply(audio)?;
        }
        r.spec
            .extra
            .insert("bandwidth".into(), json!(branch.label()));
    }
    Ok(r)
}
