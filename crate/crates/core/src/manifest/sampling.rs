use std::collections::BTreeMap;

use super::{AssetKind, CorpusIndex, Recipe};
use crate::error::{Error, Result};
use crate::simulate::{derive_seed, MixtureKind, MixtureSpec, SimRng, SR_RATE_HZ};

/// Sampling draws come from `derive_seed(spec.seed, SAMPLING_STREAM)` so they
/// never overlap the draws made while realizing the spec from `spec.seed`.
const SAMPLING_STREAM: u64 = 0;

/// Speech ids grouped by speaker; assets without a speaker each form their
/// own group.
fn speaker_groups<'a>(index: &'a CorpusIndex, ids: &[&'a str]) -> Vec<Vec<&'a str>> {
    let mut groups: BTreeMap<String, Vec<&str>> = BTreeMap::new();
    for &id in ids {
        let key = match &index.entries[id].speaker {
            Some(s) => format!("s:{s}"),
            None => format!("u:{id}"),
        };
        groups.entry(key).or_default().push(id);
    }
    groups.into_values().collect()
}

fn pick<'a>(rng: &mut SimRng, ids: &[&'a str]) -> &'a str {
    ids[rng.index(ids.len())]
}

fn draw(rng: &mut SimRng, [lo, hi]: [f64; 2]) -> f64 {
    rng.uniform_range(lo, hi)
}

/// Samples `recipe.count` fully specified mixtures from `index`.
///
/// Spec `i` is named `{name}_{i:06}` and seeded with
/// `derive_seed(recipe.seed, i)`. Every random choice of spec `i` is drawn
/// from its own stream, so the result is a pure function of the recipe and
/// the sorted asset ids, and any prefix of a larger run matches a smaller one.
pub fn sample_specs(recipe: &Recipe, index: &CorpusIndex) -> Result<Vec<MixtureSpec>> {
    recipe.validate()?;
    let mut speech: Vec<&str> = index.ids(AssetKind::Speech);
    if let Some(min) = recipe.min_speech_score {
        speech.retain(|id| index.entries[*id].score.is_some_and(|s| s >= min));
    }
    if recipe.kind == MixtureKind::SrPair {
        speech.retain(|id| index.entries[*id].sample_rate_hz == SR_RATE_HZ);
    }
    let noise = index.ids(AssetKind::Noise);
    let rirs = index.ids(AssetKind::Rir);
    let groups = speaker_groups(index, &speech);

    let need = |ok: bool, what: &str| {
        if ok {
            Ok(())
        } else {
            Err(Error::InsufficientAssets(format!(
                "recipe {} ({}) needs {what}",
                recipe.name, recipe.kind
            )))
        }
    };
    match recipe.kind {
        MixtureKind::Enhancement => {
            need(!speech.is_empty(), "at least one speech asset")?;
            need(!noise.is_empty(), "at least one noise asset")?;
        }
        MixtureKind::Separation => {
            need(groups.len() >= 2, "speech from at least two speakers")?;
            need(
                !recipe.add_noise || !noise.is_empty(),
                "at least one noise asset",
            )?;
        }
        MixtureKind::SrPair => need(!speech.is_empty(), "at least one 48 kHz speech asset")?,
    }

    let reverb_p = recipe.reverb_probability();
    let mut specs = Vec::with_capacity(recipe.count);
    for i in 0..recipe.count {
        let seed = derive_seed(recipe.seed, i as u64);
        let mut rng = SimRng::new(derive_seed(seed, SAMPLING_STREAM));
        let id = format!("{}_{i:06}", recipe.name);
        let mut spec = match recipe.kind {
            MixtureKind::Enhancement => {
                let mut s = MixtureSpec::new(
                    id,
                    recipe.kind,
                    vec![pick(&mut rng, &speech).to_string()],
                    seed,
                );
                s.noise_id = Some(pick(&mut rng, &noise).to_string());
                let reverberant = rng.bernoulli(reverb_p);
                s.reverberant = Some(reverberant);
                if reverberant && !rirs.is_empty() {
                    s.rir_id = Some(pick(&mut rng, &rirs).to_string());
                }
                s.snr_noise_db = Some(draw(&mut rng, recipe.noise_range()));
                s
            }
            MixtureKind::Separation => {
                let a = rng.index(groups.len());
                let b = (a + 1 + rng.index(groups.len() - 1)) % groups.len();
                let ids = vec![
                    pick(&mut rng, &groups[a]).to_string(),
                    pick(&mut rng, &groups[b]).to_string(),
                ];
                let mut s = MixtureSpec::new(id, recipe.kind, ids, seed);
                s.reverberant = Some(false);
                s.snr_speech_db = Some(draw(&mut rng, recipe.speech_range()));
                if recipe.add_noise {
                    s.noise_id = Some(pick(&mut rng, &noise).to_string());
                    s.snr_noise_db = Some(draw(&mut rng, recipe.noise_range()));
                }
                s
            }
            MixtureKind::SrPair => {
                let mut s = MixtureSpec::new(
                    id,
                    recipe.kind,
                    vec![pick(&mut rng, &speech).to_string()],
                    seed,
                );
                s.cutoff_hz = Some(draw(&mut rng, recipe.cutoff_range()));
                s
            }
        };
        spec.gain_policy = recipe.gain_policy;
        specs.push(spec);
    }
    Ok(specs)
}
