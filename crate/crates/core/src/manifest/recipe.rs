use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulate::{
    BandwidthAugment, GainPolicy, MixtureKind, RealizeOptions, TargetPolicy,
    DEFAULT_REVERB_FRACTION, SR_CUTOFF_RANGE_HZ,
};

/// Declarative description of a simulated dataset.
///
/// Ranges are inclusive `[lo, hi]`. Unset ranges fall back to the defaults
/// of the recipe kind:
///
/// | kind | noise SNR | speaker SNR | reverb fraction | cutoff |
/// |---|---|---|---|---|
/// | enhancement | [0, 15] | | 0.3 | |
/// | separation | [−5, 15] | [0, 5] | 0 | |
/// | sr_pair | | | 0 | [8000, 16000] |
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Recipe {
    pub name: String,
    pub count: usize,
    pub seed: u64,
    #[serde(default)]
    pub kind: MixtureKind,
    #[serde(default)]
    pub snr_noise_range_db: Option<[f64; 2]>,
    #[serde(default)]
    pub snr_speech_range_db: Option<[f64; 2]>,
    #[serde(default)]
    pub reverb_fraction: Option<f64>,
    #[serde(default)]
    pub cutoff_range_hz: Option<[f64; 2]>,
    #[serde(default)]
    pub gain_policy: GainPolicy,
    /// Separation only: add noise to the two-speaker mixture.
    #[serde(default = "yes")]
    pub add_noise: bool,
    /// Only speech assets with an external score at or above this value.
    #[serde(default)]
    pub min_speech_score: Option<f64>,
    #[serde(default)]
    pub target: TargetPolicy,
    #[serde(default)]
    pub bandwidth_augment: Option<BandwidthAugment>,
}

fn yes() -> bool {
    true
}

impl Recipe {
    pub fn new(name: impl Into<String>, kind: MixtureKind, count: usize, seed: u64) -> Self {
        Recipe {
            name: name.into(),
            count,
            seed,
            kind,
            snr_noise_range_db: None,
            snr_speech_range_db: None,
            reverb_fraction: None,
            cutoff_range_hz: None,
            gain_policy: GainPolicy::default(),
            add_noise: true,
            min_speech_score: None,
            target: TargetPolicy::default(),
            bandwidth_augment: None,
        }
    }

    /// Reads TOML (`.toml`) or JSON (anything else).
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let recipe: Recipe = if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text)
                .map_err(|e| Error::InvalidRecipe(format!("{}: {e}", path.display())))?
        } else {
            serde_json::from_str(&text)
                .map_err(|e| Error::InvalidRecipe(format!("{}: {e}", path.display())))?
        };
        recipe.validate()?;
        Ok(recipe)
    }

    pub fn noise_range(&self) -> [f64; 2] {
        self.snr_noise_range_db.unwrap_or(match self.kind {
            MixtureKind::Separation => [-5.0, 15.0],
            _ => [0.0, 15.0],
        })
    }

    pub fn speech_range(&self) -> [f64; 2] {
        self.snr_speech_range_db.unwrap_or([0.0, 5.0])
    }

    pub fn reverb_probability(&self) -> f64 {
        self.reverb_fraction.unwrap_or(match self.kind {
            MixtureKind::Enhancement => DEFAULT_REVERB_FRACTION,
            _ => 0.0,
        })
    }

    pub fn cutoff_range(&self) -> [f64; 2] {
        self.cutoff_range_hz
            .unwrap_or([SR_CUTOFF_RANGE_HZ.0, SR_CUTOFF_RANGE_HZ.1])
    }

    pub fn realize_options(&self) -> RealizeOptions {
        RealizeOptions {
            target: self.target,
            reverb_fraction: self.reverb_probability(),
            bandwidth: self.bandwidth_augment,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidRecipe(format!("{}: {msg}", self.name)));
        if self.name.is_empty() {
            return Err(Error::InvalidRecipe("recipe name is empty".into()));
        }
        if self.count == 0 {
            return bad("count must be at least 1".into());
        }
        for (field, range) in [
            ("snr_noise_range_db", self.snr_noise_range_db),
            ("snr_speech_range_db", self.snr_speech_range_db),
            ("cutoff_range_hz", self.cutoff_range_hz),
        ] {
            if let Some([lo, hi]) = range {
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                    return bad(format!(
                        "{field} must be finite with lo <= hi, got [{lo}, {hi}]"
                    ));
                }
            }
        }
        let p = self.reverb_probability();
        if !(0.0..=1.0).contains(&p) {
            return bad(format!("reverb_fraction must lie in [0, 1], got {p}"));
        }
        if self.kind != MixtureKind::Enhancement && p > 0.0 {
            return bad(format!(
                "reverberation is only supported for enhancement recipes, not {}",
                self.kind
            ));
        }
        let [lo, hi] = self.cutoff_range();
        if lo < SR_CUTOFF_RANGE_HZ.0 || hi > SR_CUTOFF_RANGE_HZ.1 {
            return bad(format!(
                "cutoff_range_hz must lie within [{}, {}]",
                SR_CUTOFF_RANGE_HZ.0, SR_CUTOFF_RANGE_HZ.1
            ));
        }
        if let Some(bw) = self.bandwidth_augment {
            if !(bw.p16 >= 0.0 && bw.p8 >= 0.0 && bw.p16 + bw.p8 <= 1.0) {
                return bad(
                    "bandwidth_augment probabilities must be non-negative and sum to at most 1"
                        .into(),
                );
            }
        }
        Ok(())
    }
}
