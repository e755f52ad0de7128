use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use voicebench::audio::{read_wav, to_mono, write_wav, AudioBuffer, ChannelPolicy, WavEncoding};
use voicebench::Error;

/// Process exit status shared by every subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Usage = 1,
    Data = 2,
    /// At least one utterance succeeded and at least one failed.
    Partial = 3,
}

impl ExitStatus {
    /// Status of a batch with `ok` successes and `failed` failures.
    pub fn for_batch(ok: usize, failed: usize) -> Self {
        match (ok, failed) {
            (_, 0) => ExitStatus::Success,
            (0, _) => ExitStatus::Data,
            _ => ExitStatus::Partial,
        }
    }
}

impl From<ExitStatus> for ExitCode {
    fn from(s: ExitStatus) -> Self {
        ExitCode::from(s as u8)
    }
}

#[derive(Debug)]
pub struct CliError {
    pub status: ExitStatus,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            status: ExitStatus::Usage,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        CliError {
            status: ExitStatus::Data,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::UnknownMetric(_)
            | Error::InvalidRoom(_)
            | Error::UnachievableRT60 { .. }
            | Error::InvalidRecipe(_)
            | Error::InvalidCutoff(_)
            | Error::TooManySources(_) => ExitStatus::Usage,
            _ => ExitStatus::Data,
        };
        CliError {
            status,
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::data(format!("{}: {e}", path.display()))
}

/// Thread pool for utterance-parallel work; `0` means one thread per core.
pub fn pool(workers: usize) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::usage(format!("cannot start {workers} workers: {e}")))
}

/// WAV files under `dir` as sorted `/`-separated relative paths.
pub fn wav_tree(dir: &Path) -> CliResult<Vec<String>> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<String>) -> std::io::Result<()> {
        for entry in fs::read_dir(dir)? {
            let p = entry?.path();
            if p.is_dir() {
                walk(root, &p, out)?;
            } else if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("wav")) {
                let rel = p.strip_prefix(root).expect("under root");
                out.push(
                    rel.components()
                        .map(|c| c.as_os_str().to_string_lossy())
                        .collect::<Vec<_>>()
                        .join("/"),
                );
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    walk(dir, dir, &mut out).map_err(|e| io_err(dir, e))?;
    out.sort();
    Ok(out)
}

pub fn read_mono(path: &Path) -> voicebench::Result<AudioBuffer> {
    let a = read_wav(path)?;
    if a.is_mono() {
        Ok(a)
    } else {
        to_mono(&a, ChannelPolicy::Average)
    }
}

fn tmp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".tmp");
    path.with_file_name(name)
}

fn ensure_parent(path: &Path) -> CliResult<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => fs::create_dir_all(p).map_err(|e| io_err(p, e)),
        _ => Ok(()),
    }
}

/// Writes a float WAV through a temporary file so readers never see a
/// partial file.
pub fn write_wav_atomic(path: &Path, audio: &AudioBuffer) -> voicebench::Result<()> {
    ensure_parent(path).map_err(|e| Error::InvalidSpec(e.message))?;
    let tmp = tmp_path(path);
    write_wav(audio, &tmp, WavEncoding::Float32)?;
    fs::rename(&tmp, path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Runs `write` against a buffered temporary file, then renames it to `path`.
pub fn write_atomic<F>(path: &Path, write: F) -> CliResult<()>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    ensure_parent(path)?;
    let tmp = tmp_path(path);
    let f = File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
    let mut w = BufWriter::new(f);
    write(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

/// Writes to `path`, or to stdout when it is `None` or `-`.
pub fn write_output<F>(path: Option<&Path>, write: F) -> CliResult<()>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    match path {
        Some(p) if p != Path::new("-") => write_atomic(p, write),
        _ => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)
                .and_then(|_| lock.flush())
                .map_err(|e| CliError::data(e.to_string()))
        }
    }
}

/// Parses `a,b,c` into exactly `N` numbers.
pub fn parse_list<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let parts: Vec<&str> = s.split([',', 'x']).map(str::trim).collect();
    if parts.len() != N {
        return Err(format!("expected {N} comma-separated numbers, got {s:?}"));
    }
    let mut out = [0.0; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|_| format!("{p:?} is not a number"))?;
    }
    Ok(out)
}
