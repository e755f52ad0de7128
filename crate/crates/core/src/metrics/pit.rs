use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{si_snr, snr};
use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

/// Largest source count searched exhaustively (6! = 720 assignments).
pub const MAX_PIT_SOURCES: usize = 6;

/// Pairwise score maximized by [`pit_score`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PitMetric {
    #[default]
    SiSnr,
    Snr,
}

impl PitMetric {
    fn eval(self, reference: &AudioBuffer, estimate: &AudioBuffer) -> Result<f64> {
        Ok(match self {
            PitMetric::SiSnr => si_snr(reference, estimate)?.value,
            PitMetric::Snr => snr(reference, estimate)?.value,
        })
    }
}

impl FromStr for PitMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "si_snr" => Ok(PitMetric::SiSnr),
            "snr" => Ok(PitMetric::Snr),
            other => Err(Error::UnknownMetric(other.to_string())),
        }
    }
}

impl fmt::Display for PitMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PitMetric::SiSnr => "si_snr",
            PitMetric::Snr => "snr",
        })
    }
}

/// Best assignment of estimates to references.
///
/// `permutation[i]` is the index of the estimate matched to reference `i`,
/// and `per_pair_scores[i]` its score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PitResult {
    pub permutation: Vec<usize>,
    pub per_pair_scores: Vec<f64>,
    pub mean_score: f64,
}

/// Advances `p` to the next permutation in lexicographic order.
fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len())
        .rev()
        .find(|&j| p[j] > p[i - 1])
        .expect("pivot has a successor");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Exhaustive permutation-invariant scoring.
///
/// All `N!` assignments are visited in lexicographic order and one replaces
/// the incumbent only when its mean score is strictly higher, so ties go to
/// the lexicographically smallest permutation.
pub fn pit_score(
    refs: &[AudioBuffer],
    ests: &[AudioBuffer],
    metric: PitMetric,
) -> Result<PitResult> {
    let n = refs.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    if n != ests.len() {
        return Err(Error::SourceCountMismatch {
            references: n,
            estimates: ests.len(),
        });
    }
    if n > MAX_PIT_SOURCES {
        return Err(Error::TooManySources(n));
    }
    // scores[i][j]: reference i against estimate j
    let scores = refs
        .iter()
        .map(|r| {
            ests.iter()
                .map(|e| metric.eval(r, e))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut perm: Vec<usize> = (0..n).collect();
    let total = |p: &[usize]| -> f64 { p.iter().enumerate().map(|(i, &j)| scores[i][j]).sum() };
    let mut best = perm.clone();
    let mut best_total = total(&perm);
    while next_permutation(&mut perm) {
        let t = total(&perm);
        if t > best_total {
            best_total = t;
            best.copy_from_slice(&perm);
        }
    }
    let per_pair_scores: Vec<f64> = best
        .iter()
        .enumerate()
        .map(|(i, &j)| scores[i][j])
        .collect();
    Ok(PitResult {
        mean_score: per_pair_scores.iter().sum::<f64>() / n as f64,
        permutation: best,
        per_pair_scores,
    })
}
