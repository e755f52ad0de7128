//! Speech quality and separation metrics.
//!
//! Every pairwise metric takes a mono reference and a mono estimate at the
//! same sample rate. Lengths may differ by up to [`LENGTH_TOLERANCE_S`]; the
//! longer signal is then trimmed and the score carries a `length_trimmed`
//! flag. Ratios in dB are capped at [`DB_CAP`] (flag `capped`) so reports
//! never contain infinities.

mod bss;
mod loudness;
mod pit;
mod registry;
mod snr;
mod spectral;
mod stoi;

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub use bss::{bss_eval, BssScores, DEFAULT_FILTER_LEN};
pub use loudness::loudness_lufs;
pub use pit::{pit_score, PitMetric, PitResult, MAX_PIT_SOURCES};
pub use registry::{score_pair, Metric, MetricOptions, MetricRegistry, PairInput, BUILTIN_METRICS};
pub use snr::{si_snr, si_snr_improvement, snr};
pub use spectral::{lsd, mcd, DEFAULT_MCD_MELS, DEFAULT_MCD_ORDER, LSD_EPSILON};
pub use stoi::stoi;

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

/// Largest dB value a ratio metric reports.
pub const DB_CAP: f64 = 100.0;
/// Largest length difference, in seconds, resolved by trimming.
pub const LENGTH_TOLERANCE_S: f64 = 0.5;

pub const FLAG_CAPPED: &str = "capped";
pub const FLAG_FLOORED: &str = "floored";
pub const FLAG_LENGTH_TRIMMED: &str = "length_trimmed";
pub const FLAG_SILENT_FRAMES: &str = "silent_frames_skipped";

/// A metric value plus the qualifiers attached while computing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Score {
    pub value: f64,
    pub flags: Vec<&'static str>,
}

impl Score {
    pub fn new(value: f64) -> Self {
        Score {
            value,
            flags: Vec::new(),
        }
    }

    pub fn is_capped(&self) -> bool {
        self.flags.contains(&FLAG_CAPPED)
    }

    pub(crate) fn flag(mut self, flag: &'static str) -> Self {
        if !self.flags.contains(&flag) {
            self.flags.push(flag);
        }
        self
    }

    pub(crate) fn flag_if(self, cond: bool, flag: &'static str) -> Self {
        if cond {
            self.flag(flag)
        } else {
            self
        }
    }
}

/// Per-utterance scores. Flags are `"<metric>:<flag>"`; a metric that
/// failed appears in `errors` instead of `scores`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricReport {
    pub utterance_id: String,
    pub scores: BTreeMap<String, f64>,
    #[serde(default)]
    pub flags: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub errors: BTreeMap<String, String>,
}

impl MetricReport {
    pub fn new(utterance_id: impl Into<String>) -> Self {
        MetricReport {
            utterance_id: utterance_id.into(),
            ..Default::default()
        }
    }

    pub fn has_flag(&self, metric: &str, flag: &str) -> bool {
        self.flags.iter().any(|f| {
            f.split_once(':')
                .is_some_and(|(m, fl)| m == metric && fl == flag)
        })
    }

    pub fn insert(&mut self, metric: &str, score: Score) {
        self.scores.insert(metric.to_string(), score.value);
        for f in score.flags {
            self.flags.push(format!("{metric}:{f}"));
        }
    }

    pub fn insert_error(&mut self, metric: &str, err: &Error) {
        self.errors
            .insert(metric.to_string(), format!("{}: {err}", err.kind()));
    }
}

/// `10·log10(num / den)`, capped at +[`DB_CAP`] and floored at -[`DB_CAP`].
pub(crate) fn ratio_db(num: f64, den: f64) -> Score {
    if den <= 0.0 || num >= den * 1e10 {
        return Score::new(DB_CAP).flag(FLAG_CAPPED);
    }
    if num <= den * 1e-10 {
        return Score::new(-DB_CAP).flag(FLAG_FLOORED);
    }
    Score::new(10.0 * (num / den).log10())
}

pub(crate) fn energy(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Mono reference/estimate trimmed to a common length.
pub(crate) struct Aligned<'a> {
    pub reference: &'a [f64],
    pub estimate: &'a [f64],
    pub sample_rate_hz: u32,
    pub trimmed: bool,
}

impl Aligned<'_> {
    pub fn score(&self, value: f64) -> Score {
        Score::new(value).flag_if(self.trimmed, FLAG_LENGTH_TRIMMED)
    }

    pub fn tag(&self, score: Score) -> Score {
        score.flag_if(self.trimmed, FLAG_LENGTH_TRIMMED)
    }
}

pub(crate) fn common_length(lengths: &[usize], sample_rate_hz: u32) -> Result<usize> {
    let min = *lengths.iter().min().ok_or(Error::EmptyInput)?;
    let max = *lengths.iter().max().ok_or(Error::EmptyInput)?;
    let tolerance = (LENGTH_TOLERANCE_S * sample_rate_hz as f64).round() as usize;
    if max - min > tolerance {
        return Err(Error::LengthMismatch {
            reference: lengths[0],
            estimate: if lengths[0] == min { max } else { min },
            tolerance,
        });
    }
    Ok(min)
}

pub(crate) fn check_rate(reference: &AudioBuffer, other: &AudioBuffer) -> Result<()> {
    if reference.sample_rate_hz() != other.sample_rate_hz() {
        return Err(Error::RateMismatch {
            reference: reference.sample_rate_hz(),
            estimate: other.sample_rate_hz(),
        });
    }
    Ok(())
}

pub(crate) fn align<'a>(
    reference: &'a AudioBuffer,
    estimate: &'a AudioBuffer,
) -> Result<Aligned<'a>> {
    let r = reference.mono_samples()?;
    let e = estimate.mono_samples()?;
    check_rate(reference, estimate)?;
    let n = common_length(&[r.len(), e.len()], reference.sample_rate_hz())?;
    if n == 0 {
        return Err(Error::EmptySignal);
    }
    let r = &r[..n];
    if r.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateSignal);
    }
    Ok(Aligned {
        reference: r,
        estimate: &e[..n],
        sample_rate_hz: reference.sample_rate_hz(),
        trimmed: r.len() != reference.frames() || n != estimate.frames(),
    })
}
