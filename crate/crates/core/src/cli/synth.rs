use std::path::Path;

use rayon::prelude::*;
use serde_json::json;
use voicebench::manifest::{sample_specs, save_manifest, scan_corpus, Recipe};
use voicebench::simulate::{
    derive_seed, generate_rir, make_sr_pair, realize, schroeder_rt60, MixtureKind, MixtureSpec,
    RoomSpec, SimRng, Walls,
};

use super::common::{pool, read_mono, wav_tree, write_wav_atomic, CliError, CliResult, ExitStatus};
use super::{RirArgs, SimulateArgs, SrPairsArgs};

pub const MANIFEST_NAME: &str = "manifest.jsonl";

pub fn simulate(a: SimulateArgs) -> CliResult<ExitStatus> {
    let recipe = Recipe::load(&a.recipe)?;
    let mut index = scan_corpus(&a.corpus)?;
    if let Some(p) = &a.speaker_map {
        index.apply_speaker_map(p)?;
    }
    if let Some(p) = &a.scores {
        index.apply_scores(p)?;
    }
    let specs = sample_specs(&recipe, &index)?;
    let manifest = a.out.join(MANIFEST_NAME);
    std::fs::create_dir_all(&a.out).map_err(|e| super::common::io_err(&a.out, e))?;
    if a.dry_run {
        save_manifest(&specs, &manifest)?;
        log::info!("wrote {} specs to {}", specs.len(), manifest.display());
        return Ok(ExitStatus::Success);
    }
    let opts = recipe.realize_options();
    let out = &a.out;
    let results: Vec<voicebench::Result<MixtureSpec>> = pool(a.workers.workers)?.install(|| {
        specs
            .par_iter()
            .map(|spec| {
                let r = realize(spec, &index, &opts)?;
                for (dir, audio) in &r.outputs {
                    write_wav_atomic(
                        &out.join(dir).join(format!("{}.wav", r.spec.utterance_id)),
                        audio,
                    )?;
                }
                let mut spec = r.spec;
                if !r.flags.is_empty() {
                    spec.extra.insert("flags".into(), json!(r.flags));
                }
                Ok(spec)
            })
            .collect()
    });
    let mut realized = Vec::new();
    let mut failed = 0;
    for (spec, r) in specs.iter().zip(results) {
        match r {
            Ok(s) => realized.push(s),
            Err(e) => {
                failed += 1;
                log::error!("{}: {e}", spec.utterance_id);
            }
        }
    }
    save_manifest(&realized, &manifest)?;
    log::info!(
        "realized {} of {} specs into {}",
        realized.len(),
        specs.len(),
        out.display()
    );
    Ok(ExitStatus::for_batch(realized.len(), failed))
}

pub fn rir(a: RirArgs) -> CliResult<ExitStatus> {
    let mut room = RoomSpec::new(a.room, a.src, a.mic, a.rt60, a.fs);
    if a.anechoic {
        room.walls = Walls::ReflectionCoeffs([0.0; 6]);
        room.max_order = Some(0);
    }
    room.max_order = a.order.or(room.max_order);
    room.sound_speed_mps = a.sound_speed;
    if let Some(len) = a.len {
        room.rir_length_samples = len;
    }
    let h = generate_rir(&room)?;
    write_wav_atomic(&a.out, &h)?;
    let x = h.samples();
    let peak = (0..x.len())
        .max_by(|&i, &j| x[i].abs().total_cmp(&x[j].abs()))
        .unwrap_or(0);
    let summary = json!({
        "out": a.out,
        "samples": x.len(),
        "peak_sample": peak,
        "peak_value": x.get(peak),
        "direct_distance_m": room.direct_distance_m(),
        "rt60_estimate_s": if a.anechoic { None } else { schroeder_rt60(x, a.fs) },
    });
    println!("{summary}");
    Ok(ExitStatus::Success)
}

pub fn srpairs(a: SrPairsArgs) -> CliResult<ExitStatus> {
    let [lo, hi] = a.cutoff_range;
    if !(lo <= hi) {
        return Err(CliError::usage(format!(
            "--cutoff-range must have lo <= hi, got {lo},{hi}"
        )));
    }
    let files = wav_tree(&a.input)?;
    if files.is_empty() {
        return Err(CliError::data(format!(
            "no WAV files under {}",
            a.input.display()
        )));
    }
    let out = &a.out;
    let results: Vec<voicebench::Result<MixtureSpec>> = pool(a.workers.workers)?.install(|| {
        files
            .par_iter()
            .enumerate()
            .map(|(i, rel)| {
                let seed = derive_seed(a.seed, i as u64);
                let cutoff = SimRng::new(seed).uniform_range(lo, hi);
                let hr = read_mono(&a.input.join(rel))?;
                let pair = make_sr_pair(&hr, cutoff)?;
                write_wav_atomic(&out.join("lr").join(rel), &pair.lr_input)?;
                write_wav_atomic(&out.join("hr").join(rel), &pair.hr_target)?;
                let id = Path::new(rel)
                    .with_extension("")
                    .to_string_lossy()
                    .into_owned();
                let mut spec = MixtureSpec::new(id, MixtureKind::SrPair, vec![rel.clone()], seed);
                spec.cutoff_hz = Some(cutoff);
                Ok(spec)
            })
            .collect()
    });
    let mut specs = Vec::new();
    let mut failed = 0;
    for (rel, r) in files.iter().zip(results) {
        match r {
            Ok(s) => specs.push(s),
            Err(e) => {
                failed += 1;
                log::error!("{rel}: {e}");
            }
        }
    }
    if specs.is_empty() {
        return Err(CliError::data(
            "no super-resolution pairs were written (see errors above)",
        ));
    }
    save_manifest(&specs, &out.join("pairs.jsonl"))?;
    Ok(ExitStatus::for_batch(specs.len(), failed))
}
