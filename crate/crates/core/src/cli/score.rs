use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use voicebench::audio::AudioBuffer;
use voicebench::dsp::resample;
use voicebench::metrics::{
    loudness_lufs, pit_score, si_snr_improvement, MetricRegistry, MetricReport, PairInput,
    PitMetric, Score,
};
use voicebench::report::{aggregate, emit, write_per_utterance_csv, SummaryMetadata};
use voicebench::Error;

use super::common::{
    io_err, pool, read_mono, wav_tree, write_atomic, write_output, CliError, CliResult, ExitStatus,
};
use super::{CompareArgs, LoudnessArgs, ScoreArgs, SummaryOut};

/// Utterance id plus the files it is scored from.
struct Pair {
    id: String,
    reference: PathBuf,
    estimate: PathBuf,
    mixture: Option<PathBuf>,
}

fn read_pairs_tsv(path: &Path) -> CliResult<Vec<(String, String)>> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|(i, l)| {
            l.split_once('\t')
                .map(|(r, e)| (r.trim().to_string(), e.trim().to_string()))
                .ok_or_else(|| {
                    CliError::usage(format!(
                        "{}:{}: expected ref<TAB>est",
                        path.display(),
                        i + 1
                    ))
                })
        })
        .collect()
}

fn collect_pairs(a: &ScoreArgs) -> CliResult<Vec<Pair>> {
    let (r, e) = (&a.reference, &a.estimate);
    if r.is_file() && e.is_file() {
        let id = r
            .file_name()
            .unwrap_or_default()
            .to_string_lossy()
            .into_owned();
        return Ok(vec![Pair {
            id,
            reference: r.clone(),
            estimate: e.clone(),
            mixture: a.mix.clone(),
        }]);
    }
    if !(r.is_dir() && e.is_dir()) {
        return Err(CliError::usage(
            "--ref and --est must both be files or both be directories",
        ));
    }
    let names: Vec<(String, String)> = match &a.pairs {
        Some(tsv) => read_pairs_tsv(tsv)?,
        None => {
            let ests: std::collections::BTreeSet<String> = wav_tree(e)?.into_iter().collect();
            let refs = wav_tree(r)?;
            let unmatched = refs.iter().filter(|n| !ests.contains(*n)).count();
            if unmatched > 0 {
                log::warn!("{unmatched} reference file(s) have no estimate with the same name");
            }
            refs.into_iter()
                .filter(|n| ests.contains(n))
                .map(|n| (n.clone(), n))
                .collect()
        }
    };
    if names.is_empty() {
        return Err(CliError::data(format!(
            "no reference/estimate pairs matched under {} and {}",
            r.display(),
            e.display()
        )));
    }
    Ok(names
        .into_iter()
        .map(|(rn, en)| Pair {
            reference: r.join(&rn),
            estimate: e.join(&en),
            mixture: a.mix.as_ref().map(|m| m.join(&rn)),
            id: rn,
        })
        .collect())
}

fn conform(audio: AudioBuffer, rate: u32, allow: bool) -> voicebench::Result<AudioBuffer> {
    if audio.sample_rate_hz() == rate {
        Ok(audio)
    } else if allow {
        resample(&audio, rate)
    } else {
        Err(Error::RateMismatch {
            reference: rate,
            estimate: audio.sample_rate_hz(),
        })
    }
}

fn score_one(
    pair: &Pair,
    a: &ScoreArgs,
    registry: &MetricRegistry,
) -> voicebench::Result<MetricReport> {
    let mut reference = read_mono(&pair.reference)?;
    if let Some(fs) = a.sample_rate {
        reference = resample(&reference, fs)?;
    }
    let rate = reference.sample_rate_hz();
    let allow = a.allow_resample || a.sample_rate.is_some();
    let estimate = conform(read_mono(&pair.estimate)?, rate, allow)?;
    let mixture = match &pair.mixture {
        Some(p) => Some(conform(read_mono(p)?, rate, allow)?),
        None => None,
    };
    let input = PairInput {
        reference: &reference,
        estimate: &estimate,
        mixture: mixture.as_ref(),
    };
    let report = registry.evaluate(&pair.id, &input, &a.metrics)?;
    if report.scores.is_empty() && !report.errors.is_empty() {
        let all: Vec<String> = report
            .errors
            .iter()
            .map(|(m, e)| format!("{m}: {e}"))
            .collect();
        return Err(Error::InvalidSpec(format!(
            "every metric failed ({})",
            all.join("; ")
        )));
    }
    Ok(report)
}

fn default_utterances(out: &SummaryOut) -> Option<PathBuf> {
    out.utterances.clone().or_else(|| {
        out.out
            .as_ref()
            .filter(|p| p.as_os_str() != "-")
            .map(|p| p.with_extension("utterances.jsonl"))
    })
}

/// Writes per-utterance records and the summary; returns the batch status.
fn finish<T: Serialize>(
    out: &SummaryOut,
    records: &[T],
    reports: &[MetricReport],
    failed: usize,
) -> CliResult<ExitStatus> {
    if let Some(path) = default_utterances(out) {
        write_atomic(&path, |w| {
            for r in records {
                serde_json::to_writer(&mut *w, r)?;
                w.write_all(b"\n")?;
            }
            Ok(())
        })?;
    }
    if let Some(path) = &out.utterances_csv {
        write_atomic(path, |w| write_per_utterance_csv(reports, w))?;
    }
    if reports.is_empty() {
        return Err(CliError::data("every utterance failed"));
    }
    let table = aggregate(
        reports,
        SummaryMetadata::new(out.dataset.clone(), out.model.clone()),
    )?;
    write_output(out.out.as_deref(), |w| emit(&table, out.format, w))?;
    Ok(ExitStatus::for_batch(reports.len(), failed))
}

pub fn score(a: ScoreArgs) -> CliResult<ExitStatus> {
    let registry = MetricRegistry::default();
    registry.validate(&a.metrics)?;
    let pairs = collect_pairs(&a)?;
    let results: Vec<voicebench::Result<MetricReport>> = pool(a.workers.workers)?.install(|| {
        pairs
            .par_iter()
            .map(|p| score_one(p, &a, &registry))
            .collect()
    });
    let mut reports = Vec::new();
    let mut failed = 0;
    for (pair, r) in pairs.iter().zip(results) {
        match r {
            Ok(r) => reports.push(r),
            Err(e) => {
                failed += 1;
                log::error!("{}: {e}", pair.id);
            }
        }
    }
    finish(&a.out, &reports, &reports, failed)
}

#[derive(Debug, Serialize)]
struct CompareRecord {
    #[serde(flatten)]
    report: MetricReport,
    /// `permutation[i]` is the estimate matched to reference `i`.
    permutation: Vec<usize>,
}

fn source_dirs(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let mut dirs: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| io_err(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    Ok(dirs)
}

fn compare_one(
    id: &str,
    refs: &[PathBuf],
    ests: &[PathBuf],
    mix: Option<&Path>,
    metric: PitMetric,
) -> voicebench::Result<CompareRecord> {
    let load = |dirs: &[PathBuf]| -> voicebench::Result<Vec<AudioBuffer>> {
        dirs.iter().map(|d| read_mono(&d.join(id))).collect()
    };
    let (r, e) = (load(refs)?, load(ests)?);
    let pit = pit_score(&r, &e, metric)?;
    let mut report = MetricReport::new(id);
    let name = metric.to_string();
    let capped = pit
        .per_pair_scores
        .iter()
        .all(|&s| s >= voicebench::metrics::DB_CAP);
    report.insert(&name, Score::new(pit.mean_score));
    if capped {
        report
            .flags
            .push(format!("{name}:{}", voicebench::metrics::FLAG_CAPPED));
    }
    for (i, s) in pit.per_pair_scores.iter().enumerate() {
        report.scores.insert(format!("{name}_s{}", i + 1), *s);
    }
    if let Some(m) = mix {
        let mixture = read_mono(&m.join(id))?;
        let mut total = 0.0;
        for (i, &j) in pit.permutation.iter().enumerate() {
            total += si_snr_improvement(&mixture, &e[j], &r[i])?.value;
        }
        report.insert("si_snri", Score::new(total / r.len() as f64));
    }
    log::info!(
        "{id}: permutation ({})",
        pit.permutation
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(",")
    );
    Ok(CompareRecord {
        report,
        permutation: pit.permutation,
    })
}

pub fn compare(a: CompareArgs) -> CliResult<ExitStatus> {
    let refs = source_dirs(&a.refs)?;
    let ests = source_dirs(&a.ests)?;
    if refs.is_empty() {
        return Err(CliError::data(format!(
            "no source subdirectories under {}",
            a.refs.display()
        )));
    }
    if refs.len() != ests.len() {
        return Err(CliError::data(format!(
            "{} reference sources but {} estimate sources",
            refs.len(),
            ests.len()
        )));
    }
    let ids = wav_tree(&refs[0])?;
    if ids.is_empty() {
        return Err(CliError::data(format!(
            "no WAV files under {}",
            refs[0].display()
        )));
    }
    let results: Vec<voicebench::Result<CompareRecord>> = pool(a.workers.workers)?.install(|| {
        ids.par_iter()
            .map(|id| compare_one(id, &refs, &ests, a.mix.as_deref(), a.metric))
            .collect()
    });
    let mut records = Vec::new();
    let mut failed = 0;
    for (id, r) in ids.iter().zip(results) {
        match r {
            Ok(r) => records.push(r),
            Err(e) => {
                failed += 1;
                log::error!("{id}: {e}");
            }
        }
    }
    let reports: Vec<MetricReport> = records.iter().map(|r| r.report.clone()).collect();
    finish(&a.out, &records, &reports, failed)
}

pub fn loudness(a: LoudnessArgs) -> CliResult<ExitStatus> {
    let (root, files) = if a.input.is_dir() {
        (a.input.clone(), wav_tree(&a.input)?)
    } else {
        let name = a
            .input
            .file_name()
            .unwrap_or_default()
            .to_string_lossy()
            .into_owned();
        (
            a.input.parent().map(Path::to_path_buf).unwrap_or_default(),
            vec![name],
        )
    };
    if files.is_empty() {
        return Err(CliError::data(format!(
            "no WAV files under {}",
            a.input.display()
        )));
    }
    let values: Vec<voicebench::Result<f64>> = pool(a.workers.workers)?.install(|| {
        files
            .par_iter()
            .map(|f| voicebench::audio::read_wav(root.join(f)).and_then(|x| loudness_lufs(&x)))
            .collect()
    });
    let mut ok = Vec::new();
    for (f, v) in files.iter().zip(&values) {
        match v {
            Ok(l) => {
                println!("{f}\t{l:.2} LUFS");
                ok.push(*l);
            }
            Err(Error::SilentOrGatedOut) => println!("{f}\tgated-out"),
            Err(e) => println!("{f}\terror: {e}"),
        }
    }
    if files.len() > 1 && !ok.is_empty() {
        println!("mean\t{:.2} LUFS", ok.iter().sum::<f64>() / ok.len() as f64);
    }
    Ok(ExitStatus::for_batch(ok.len(), files.len() - ok.len()))
}
