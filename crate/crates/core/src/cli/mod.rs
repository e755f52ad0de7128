mod common;
mod score;
mod synth;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use voicebench::manifest::CorpusRoot;
use voicebench::metrics::PitMetric;
use voicebench::report::ReportFormat;

pub use common::ExitStatus;
use common::{parse_list, CliError};

#[derive(Debug, Parser)]
#[command(
    name = "voicebench",
    version,
    about = "Score, compare and simulate speech audio"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Workers {
    /// Worker threads (0 = one per core)
    #[arg(long, env = "VOICEBENCH_WORKERS", default_value_t = 0)]
    workers: usize,
}

#[derive(Debug, Args)]
struct SummaryOut {
    /// Summary table destination (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv, json or markdown
    #[arg(long, default_value = "csv")]
    format: ReportFormat,
    /// Per-utterance JSONL (defaults to <out>.utterances.jsonl when --out is set)
    #[arg(long)]
    utterances: Option<PathBuf>,
    /// Per-utterance CSV dump
    #[arg(long)]
    utterances_csv: Option<PathBuf>,
    /// Dataset tag recorded in the summary
    #[arg(long)]
    dataset: Option<String>,
    /// Model tag recorded in the summary
    #[arg(long)]
    model: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score estimates against references
    Score(ScoreArgs),
    /// Permutation-invariant scoring of separated sources
    Compare(CompareArgs),
    /// Sample a dataset from a recipe and render it
    Simulate(SimulateArgs),
    /// Render one image-source room impulse response
    Rir(RirArgs),
    /// Build low-pass / full-band super-resolution pairs
    Srpairs(SrPairsArgs),
    /// Integrated loudness of files
    Loudness(LoudnessArgs),
}

#[derive(Debug, Args)]
struct ScoreArgs {
    /// Reference file or directory
    #[arg(long = "ref")]
    reference: PathBuf,
    /// Estimate file or directory (paired by relative file name)
    #[arg(long = "est")]
    estimate: PathBuf,
    /// Unprocessed mixture file or directory, needed by si_snri
    #[arg(long)]
    mix: Option<PathBuf>,
    /// Comma-separated metric names
    #[arg(long, value_delimiter = ',', default_value = "snr,si_snr,stoi")]
    metrics: Vec<String>,
    /// Resample every signal to this rate before scoring
    #[arg(long)]
    sample_rate: Option<u32>,
    /// Resample estimates (and mixtures) to the reference rate instead of failing
    #[arg(long)]
    allow_resample: bool,
    /// TSV of `ref<TAB>est` relative paths replacing name matching
    #[arg(long)]
    pairs: Option<PathBuf>,
    #[command(flatten)]
    workers: Workers,
    #[command(flatten)]
    out: SummaryOut,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// Directory with one subdirectory per source (s1, s2, ...)
    #[arg(long)]
    refs: PathBuf,
    /// Directory with the same source subdirectories
    #[arg(long)]
    ests: PathBuf,
    /// Mixture directory; enables si_snri
    #[arg(long)]
    mix: Option<PathBuf>,
    /// si_snr or snr
    #[arg(long, default_value = "si_snr")]
    metric: PitMetric,
    #[command(flatten)]
    workers: Workers,
    #[command(flatten)]
    out: SummaryOut,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Recipe file (.toml or .json)
    #[arg(long)]
    recipe: PathBuf,
    /// Asset roots as kind:path with kind speech, noise or rir (repeatable)
    #[arg(long, required = true)]
    corpus: Vec<CorpusRoot>,
    /// TSV of asset_id<TAB>speaker
    #[arg(long)]
    speaker_map: Option<PathBuf>,
    /// TSV of asset_id<TAB>score used by min_speech_score
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    /// Write the sampled manifest only
    #[arg(long)]
    dry_run: bool,
    #[command(flatten)]
    workers: Workers,
}

fn parse3(s: &str) -> Result<[f64; 3], String> {
    parse_list::<3>(s)
}

fn parse2(s: &str) -> Result<[f64; 2], String> {
    parse_list::<2>(s)
}

#[derive(Debug, Args)]
struct RirArgs {
    /// Room size LxWxH in metres
    #[arg(long, value_parser = parse3, default_value = "4x5x3")]
    room: [f64; 3],
    /// Source position x,y,z
    #[arg(long, value_parser = parse3, default_value = "1.2,2.0,1.5")]
    src: [f64; 3],
    /// Microphone position x,y,z
    #[arg(long, value_parser = parse3, default_value = "2.8,3.0,1.35")]
    mic: [f64; 3],
    /// Target RT60 in seconds (Sabine)
    #[arg(long, default_value_t = 0.3, conflicts_with = "anechoic")]
    rt60: f64,
    /// Fully absorbing walls: direct path only
    #[arg(long)]
    anechoic: bool,
    /// Maximum reflection order
    #[arg(long)]
    order: Option<u32>,
    /// Sample rate in Hz
    #[arg(long, default_value_t = 16000)]
    fs: u32,
    /// RIR length in samples (default: 1.5 x RT60, at least 0.1 s)
    #[arg(long)]
    len: Option<usize>,
    /// Speed of sound in m/s
    #[arg(long, default_value_t = voicebench::simulate::DEFAULT_SOUND_SPEED_MPS)]
    sound_speed: f64,
    /// Output WAV (float32)
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SrPairsArgs {
    /// Directory of 48 kHz WAV files
    #[arg(long = "in")]
    input: PathBuf,
    /// Low-pass cutoff range lo,hi in Hz
    #[arg(long, value_parser = parse2, default_value = "8000,16000")]
    cutoff_range: [f64; 2],
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory (lr/, hr/ and pairs.jsonl)
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    workers: Workers,
}

#[derive(Debug, Args)]
struct LoudnessArgs {
    /// WAV file or directory
    #[arg(long = "in")]
    input: PathBuf,
    #[command(flatten)]
    workers: Workers,
}

/// Parses arguments, runs the subcommand and maps the outcome to an exit code.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                ExitStatus::Usage
            } else {
                ExitStatus::Success
            };
            let _ = e.print();
            return code.into();
        }
    };
    let result = match cli.command {
        Command::Score(a) => score::score(a),
        Command::Compare(a) => score::compare(a),
        Command::Simulate(a) => synth::simulate(a),
        Command::Rir(a) => synth::rir(a),
        Command::Srpairs(a) => synth::srpairs(a),
        Command::Loudness(a) => score::loudness(a),
    };
    match result {
        Ok(status) => status.into(),
        Err(CliError { status, message }) => {
            eprintln!("error: {message}");
            status.into()
        }
    }
}
