use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::GainPolicy;
use crate::error::{Error, Result};

/// Manifest schema version written by this crate and accepted by its reader.
pub const SCHEMA_VERSION: &str = "1";

/// What a spec realizes into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixtureKind {
    /// Noisy / clean speech pair.
    #[default]
    Enhancement,
    /// Two-speaker mixture with its references.
    Separation,
    /// Low-passed input / full-band target at 48 kHz.
    SrPair,
}

impl MixtureKind {
    /// Output directories written for this kind, in output order.
    pub fn output_dirs(self) -> &'static [&'static str] {
        match self {
            MixtureKind::Enhancement | MixtureKind::SrPair => &["noisy", "clean"],
            MixtureKind::Separation => &["mix", "s1", "s2"],
        }
    }
}

impl fmt::Display for MixtureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MixtureKind::Enhancement => "enhancement",
            MixtureKind::Separation => "separation",
            MixtureKind::SrPair => "sr_pair",
        })
    }
}

impl FromStr for MixtureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "enhancement" => Ok(MixtureKind::Enhancement),
            "separation" => Ok(MixtureKind::Separation),
            "sr_pair" => Ok(MixtureKind::SrPair),
            other => Err(Error::InvalidRecipe(format!("unknown kind {other:?}"))),
        }
    }
}

/// One line of a manifest: everything needed to realize one utterance.
///
/// Optional numeric fields left empty are drawn from `seed` at realization
/// time; the realized copy has them filled in. Fields this crate does not
/// know are kept in `extra` and written back verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub schema_version: String,
    pub utterance_id: String,
    pub kind: MixtureKind,
    pub speech_ids: Vec<String>,
    #[serde(default)]
    pub noise_id: Option<String>,
    #[serde(default)]
    pub rir_id: Option<String>,
    #[serde(default)]
    pub snr_speech_db: Option<f64>,
    #[serde(default)]
    pub snr_noise_db: Option<f64>,
    #[serde(default)]
    pub reverberant: Option<bool>,
    #[serde(default)]
    pub cutoff_hz: Option<f64>,
    pub seed: u64,
    #[serde(default)]
    pub gain_policy: GainPolicy,
    #[serde(flatten)]
    pub extra: BTreeMap<String, Value>,
}

impl MixtureSpec {
    pub fn new(
        utterance_id: impl Into<String>,
        kind: MixtureKind,
        speech_ids: Vec<String>,
        seed: u64,
    ) -> Self {
        MixtureSpec {
            schema_version: SCHEMA_VERSION.to_string(),
            utterance_id: utterance_id.into(),
            kind,
            speech_ids,
            noise_id: None,
            rir_id: None,
            snr_speech_db: None,
            snr_noise_db: None,
            reverberant: None,
            cutoff_hz: None,
            seed,
            gain_policy: GainPolicy::default(),
            extra: BTreeMap::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(format!("{}: {msg}", self.utterance_id)));
        if self.utterance_id.is_empty() {
            return Err(Error::InvalidSpec("empty utterance_id".into()));
        }
        let want = if self.kind == MixtureKind::Separation {
            2
        } else {
            1
        };
        if self.speech_ids.len() != want {
            return bad(format!(
                "{} needs {want} speech id(s), got {}",
                self.kind,
                self.speech_ids.len()
            ));
        }
        for (name, v) in [
            ("snr_speech_db", self.snr_speech_db),
            ("snr_noise_db", self.snr_noise_db),
            ("cutoff_hz", self.cutoff_hz),
        ] {
            if v.is_some_and(|x| !x.is_finite()) {
                return bad(format!("{name} must be finite"));
            }
        }
        if self.kind == MixtureKind::Enhancement && self.noise_id.is_none() {
            return bad("enhancement needs a noise_id".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_fields_survive_round_trip() {
        let line = r#"{"schema_version":"1","utterance_id":"u","kind":"enhancement","speech_ids":["a.wav"],"noise_id":"n.wav","seed":18446744073709551615,"gain_policy":"none","dnsmos":3.25,"tags":["x"]}"#;
        let spec: MixtureSpec = serde_json::from_str(line).unwrap();
        assert_eq!(spec.seed, u64::MAX);
        assert_eq!(spec.extra["dnsmos"], serde_json::json!(3.25));
        let again: MixtureSpec =
            serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(again, spec);
    }

    #[test]
    fn seed_is_required() {
        let line = r#"{"schema_version":"1","utterance_id":"u","kind":"separation","speech_ids":["a","b"]}"#;
        assert!(serde_json::from_str::<MixtureSpec>(line).is_err());
    }

    #[test]
    fn validation() {
        let mut s = MixtureSpec::new("u", MixtureKind::Separation, vec!["a".into()], 1);
        assert!(s.validate().is_err());
        s.speech_ids.push("b".into());
        s.validate().unwrap();
        s.snr_noise_db = Some(f64::NAN);
        assert!(s.validate().is_err());
        let e = MixtureSpec::new("u", MixtureKind::Enhancement, vec!["a".into()], 1);
        assert!(e.validate().is_err());
    }
}
