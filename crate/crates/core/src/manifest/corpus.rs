use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::audio::{read_wav, read_wav_header, AudioBuffer};
use crate::error::{Error, Result};
use crate::simulate::AssetSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssetKind {
    Speech,
    Noise,
    Rir,
}

impl fmt::Display for AssetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AssetKind::Speech => "speech",
            AssetKind::Noise => "noise",
            AssetKind::Rir => "rir",
        })
    }
}

impl FromStr for AssetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "speech" => Ok(AssetKind::Speech),
            "noise" => Ok(AssetKind::Noise),
            "rir" => Ok(AssetKind::Rir),
            other => Err(Error::InvalidRecipe(format!(
                "unknown asset kind {other:?} (expected speech, noise or rir)"
            ))),
        }
    }
}

/// A directory whose WAV files are all of one kind. Parsed from
/// `kind:path`; a bare path is a speech root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusRoot {
    pub kind: AssetKind,
    pub path: PathBuf,
}

impl CorpusRoot {
    pub fn new(kind: AssetKind, path: impl Into<PathBuf>) -> Self {
        CorpusRoot {
            kind,
            path: path.into(),
        }
    }
}

impl FromStr for CorpusRoot {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            Some((kind, path)) if kind.parse::<AssetKind>().is_ok() => {
                Ok(CorpusRoot::new(kind.parse()?, path))
            }
            _ => Ok(CorpusRoot::new(AssetKind::Speech, s)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssetEntry {
    pub path: PathBuf,
    pub sample_rate_hz: u32,
    pub duration_s: f64,
    pub kind: AssetKind,
    /// First path component under a speech root, unless overridden.
    pub speaker: Option<String>,
    /// External per-asset quality score, when a score table was loaded.
    pub score: Option<f64>,
}

/// Immutable catalog of the assets found by [`scan_corpus`].
#[derive(Debug, Clone, Default)]
pub struct CorpusIndex {
    pub entries: BTreeMap<String, AssetEntry>,
    /// Files that were skipped, with the reason.
    pub warnings: Vec<String>,
}

fn wav_files(dir: &Path, out: &mut Vec<PathBuf>, warnings: &mut Vec<String>) -> Result<()> {
    let mut children: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| match e {
            Ok(e) => Some(e.path()),
            Err(e) => {
                warnings.push(format!("{}: {e}", dir.display()));
                None
            }
        })
        .collect();
    children.sort();
    for p in children {
        if p.is_dir() {
            wav_files(&p, out, warnings)?;
        } else if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("wav")) {
            out.push(p);
        }
    }
    Ok(())
}

fn asset_id(root: &Path, file: &Path) -> String {
    let rel = file.strip_prefix(root).unwrap_or(file);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

/// Recursively indexes the WAV files under each root.
///
/// Asset ids are paths relative to their root with `/` separators. Files
/// whose header cannot be read, or that hold no samples, are skipped and
/// listed in `warnings`.
pub fn scan_corpus(roots: &[CorpusRoot]) -> Result<CorpusIndex> {
    let mut index = CorpusIndex::default();
    for root in roots {
        let mut files = Vec::new();
        wav_files(&root.path, &mut files, &mut index.warnings)?;
        for file in files {
            let header = match read_wav_header(&file) {
                Ok(h) => h,
                Err(e) => {
                    index.warnings.push(format!("{}: {e}", file.display()));
                    continue;
                }
            };
            if header.frames == 0 {
                index
                    .warnings
                    .push(format!("{}: no samples", file.display()));
                continue;
            }
            let id = asset_id(&root.path, &file);
            let speaker = match (root.kind, id.split_once('/')) {
                (AssetKind::Speech, Some((first, _))) => Some(first.to_string()),
                _ => None,
            };
            let entry = AssetEntry {
                path: file.clone(),
                sample_rate_hz: header.sample_rate_hz,
                duration_s: header.duration_s(),
                kind: root.kind,
                speaker,
                score: None,
            };
            if let Some(prev) = index.entries.get(&id) {
                return Err(Error::DuplicateAssetId {
                    id,
                    first: prev.path.clone(),
                    second: file,
                });
            }
            index.entries.insert(id, entry);
        }
    }
    if index.entries.is_empty() {
        let names: Vec<String> = roots.iter().map(|r| r.path.display().to_string()).collect();
        return Err(Error::NoAssetsFound(names.join(", ")));
    }
    for w in &index.warnings {
        log::warn!("skipped {w}");
    }
    Ok(index)
}

/// Reads a two-column `id<TAB>value` file. Blank lines and lines starting
/// with `#` are ignored.
fn read_tsv(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (id, value) = line.split_once('\t').ok_or_else(|| Error::MalformedLine {
            line: i + 1,
            message: format!("{}: expected two tab-separated columns", path.display()),
        })?;
        rows.push((id.trim().to_string(), value.trim().to_string()));
    }
    Ok(rows)
}

impl CorpusIndex {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&AssetEntry> {
        self.entries.get(id)
    }

    /// Ids of one kind, in sorted order.
    pub fn ids(&self, kind: AssetKind) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|(_, e)| e.kind == kind)
            .map(|(id, _)| id.as_str())
            .collect()
    }

    /// Applies an `asset_id<TAB>speaker` table. Unknown ids are ignored
    /// with a warning.
    pub fn apply_speaker_map(&mut self, path: &Path) -> Result<()> {
        for (id, speaker) in read_tsv(path)? {
            match self.entries.get_mut(&id) {
                Some(e) => e.speaker = Some(speaker),
                None => self
                    .warnings
                    .push(format!("speaker map: unknown asset {id}")),
            }
        }
        Ok(())
    }

    /// Applies an `asset_id<TAB>score` table (for example an externally
    /// computed quality score used to pre-filter speech).
    pub fn apply_scores(&mut self, path: &Path) -> Result<()> {
        for (i, (id, score)) in read_tsv(path)?.into_iter().enumerate() {
            let score: f64 = score.parse().map_err(|_| Error::MalformedLine {
                line: i + 1,
                message: format!("{}: score {score:?} is not a number", path.display()),
            })?;
            match self.entries.get_mut(&id) {
                Some(e) => e.score = Some(score),
                None => self
                    .warnings
                    .push(format!("score table: unknown asset {id}")),
            }
        }
        Ok(())
    }
}

impl AssetSource for CorpusIndex {
    fn load(&self, id: &str) -> Result<AudioBuffer> {
        let entry = self
            .entries
            .get(id)
            .ok_or_else(|| Error::AssetNotFound(id.to_string()))?;
        read_wav(&entry.path)
    }
}
