//! C ABI over the voicebench library.
//!
//! Every function returns a [`VbStatus`]; outputs go through pointer
//! arguments. On failure the message is kept per thread and can be read
//! with [`vb_last_error_message`]. Audio lives behind the opaque
//! [`VbAudio`] handle, which the caller releases with [`vb_audio_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use voicebench::audio::{read_wav, write_wav, AudioBuffer, WavEncoding};
use voicebench::dsp::resample;
use voicebench::metrics::{loudness_lufs, MetricRegistry, PairInput};
use voicebench::simulate::{generate_rir, RoomSpec};
use voicebench::Error;

/// Result code of every exported function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Format = 4,
    UnknownMetric = 5,
    Signal = 6,
    Config = 7,
    Panic = 99,
}

/// Opaque audio buffer.
pub struct VbAudio(AudioBuffer);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> VbStatus {
    match err {
        Error::Io { .. } => VbStatus::Io,
        Error::MalformedWav(_) | Error::UnsupportedEncoding(_) => VbStatus::Format,
        Error::UnknownMetric(_) => VbStatus::UnknownMetric,
        Error::InvalidBuffer(_)
        | Error::ChannelOutOfRange { .. }
        | Error::InvalidStftConfig(_)
        | Error::NonColaConfig(_)
        | Error::InvalidBand(_)
        | Error::InvalidCutoff(_)
        | Error::InvalidRoom(_)
        | Error::UnachievableRT60 { .. }
        | Error::TooManySources(_) => VbStatus::Config,
        _ => VbStatus::Signal,
    }
}

struct Fail(VbStatus);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        set_error(format!("{}: {e}", e.kind()));
        Fail(status_of(&e))
    }
}

fn fail(status: VbStatus, msg: impl Into<String>) -> Fail {
    set_error(msg);
    Fail(status)
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> VbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => VbStatus::Ok,
        Ok(Err(Fail(s))) => s,
        Err(_) => {
            set_error("internal panic");
            VbStatus::Panic
        }
    }
}

unsafe fn audio<'a>(p: *const VbAudio) -> Result<&'a AudioBuffer, Fail> {
    p.as_ref()
        .map(|a| &a.0)
        .ok_or_else(|| fail(VbStatus::NullPointer, "null audio handle"))
}

unsafe fn string<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(fail(VbStatus::NullPointer, format!("null {what}")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        fail(
            VbStatus::InvalidArgument,
            format!("{what} is not valid UTF-8"),
        )
    })
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, Fail> {
    p.as_mut()
        .ok_or_else(|| fail(VbStatus::NullPointer, "null output pointer"))
}

unsafe fn point(p: *const f64, what: &str) -> Result<[f64; 3], Fail> {
    if p.is_null() {
        return Err(fail(VbStatus::NullPointer, format!("null {what}")));
    }
    let s = std::slice::from_raw_parts(p, 3);
    Ok([s[0], s[1], s[2]])
}

fn handle(a: AudioBuffer) -> *mut VbAudio {
    Box::into_raw(Box::new(VbAudio(a)))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn vb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn vb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Copies `frames * channels` planar samples (channel after channel) into a new buffer.
///
/// # Safety
/// `samples` must point to `frames * channels` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vb_audio_from_samples(
    samples: *const f64,
    frames: usize,
    channels: u32,
    sample_rate_hz: u32,
    out_audio: *mut *mut VbAudio,
) -> VbStatus {
    guard(|| {
        let dst = out(out_audio)?;
        if samples.is_null() {
            return Err(fail(VbStatus::NullPointer, "null samples"));
        }
        let n = frames
            .checked_mul(channels as usize)
            .ok_or_else(|| fail(VbStatus::InvalidArgument, "frames * channels overflows"))?;
        let data = std::slice::from_raw_parts(samples, n).to_vec();
        *dst = handle(AudioBuffer::from_planar(
            data,
            channels as usize,
            sample_rate_hz,
        )?);
        Ok(())
    })
}

/// Reads a WAV file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vb_audio_read_wav(
    path: *const c_char,
    out_audio: *mut *mut VbAudio,
) -> VbStatus {
    guard(|| {
        let dst = out(out_audio)?;
        *dst = handle(read_wav(string(path, "path")?)?);
        Ok(())
    })
}

/// Writes a 32-bit float WAV file.
///
/// # Safety
/// `audio` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn vb_audio_write_wav(
    audio: *const VbAudio,
    path: *const c_char,
) -> VbStatus {
    guard(|| {
        write_wav(
            self::audio(audio)?,
            string(path, "path")?,
            WavEncoding::Float32,
        )?;
        Ok(())
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `audio` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn vb_audio_free(audio: *mut VbAudio) {
    if !audio.is_null() {
        drop(Box::from_raw(audio));
    }
}

/// # Safety
/// `audio` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn vb_audio_frames(audio: *const VbAudio) -> usize {
    audio.as_ref().map_or(0, |a| a.0.frames())
}

/// # Safety
/// `audio` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn vb_audio_channels(audio: *const VbAudio) -> u32 {
    audio.as_ref().map_or(0, |a| a.0.channel_count() as u32)
}

/// # Safety
/// `audio` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn vb_audio_sample_rate(audio: *const VbAudio) -> u32 {
    audio.as_ref().map_or(0, |a| a.0.sample_rate_hz())
}

/// Copies planar samples into `dst`. Fails with `INVALID_ARGUMENT` when
/// `capacity` is smaller than `frames * channels`; `written` then holds the
/// required size.
///
/// # Safety
/// `dst` must hold `capacity` doubles; `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vb_audio_copy_samples(
    audio: *const VbAudio,
    dst: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> VbStatus {
    guard(|| {
        let src = self::audio(audio)?.samples();
        let written = out(written)?;
        *written = src.len();
        if capacity < src.len() {
            return Err(fail(
                VbStatus::InvalidArgument,
                format!("need {} samples, got {capacity}", src.len()),
            ));
        }
        if dst.is_null() {
            return Err(fail(VbStatus::NullPointer, "null destination"));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
        Ok(())
    })
}

/// Scores one metric by name (`snr`, `si_snr`, `si_snri`, `lsd`, `stoi`,
/// `mcd`, `bss_sdr`, `bss_sir`, `bss_sar`, `lufs`). `mixture` may be NULL
/// unless the metric needs it.
///
/// # Safety
/// Handles must be live (or NULL for `mixture`); `name` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn vb_metric(
    name: *const c_char,
    reference: *const VbAudio,
    estimate: *const VbAudio,
    mixture: *const VbAudio,
    value: *mut f64,
) -> VbStatus {
    guard(|| {
        let name = string(name, "metric name")?;
        let value = out(value)?;
        let input = PairInput {
            reference: audio(reference)?,
            estimate: audio(estimate)?,
            mixture: mixture.as_ref().map(|m| &m.0),
        };
        let report = MetricRegistry::default().evaluate("", &input, &[name])?;
        if let Some(v) = report.scores.get(name) {
            *value = *v;
            return Ok(());
        }
        let msg = report.errors.get(name).cloned().unwrap_or_default();
        Err(fail(VbStatus::Signal, msg))
    })
}

/// Integrated loudness in LUFS.
///
/// # Safety
/// `audio` must be a live handle; `value` writable.
#[no_mangle]
pub unsafe extern "C" fn vb_loudness_lufs(audio: *const VbAudio, value: *mut f64) -> VbStatus {
    guard(|| {
        let value = out(value)?;
        *value = loudness_lufs(self::audio(audio)?)?;
        Ok(())
    })
}

/// Resamples to `sample_rate_hz` into a new handle.
///
/// # Safety
/// `audio` must be a live handle; `out_audio` writable.
#[no_mangle]
pub unsafe extern "C" fn vb_resample(
    audio: *const VbAudio,
    sample_rate_hz: u32,
    out_audio: *mut *mut VbAudio,
) -> VbStatus {
    guard(|| {
        let dst = out(out_audio)?;
        *dst = handle(resample(self::audio(audio)?, sample_rate_hz)?);
        Ok(())
    })
}

/// Image-source RIR of a shoebox room with uniform walls tuned to `rt60_s`.
///
/// # Safety
/// `room_dims`, `source` and `mic` must each point to 3 doubles (metres).
#[no_mangle]
pub unsafe extern "C" fn vb_rir(
    room_dims: *const f64,
    source: *const f64,
    mic: *const f64,
    rt60_s: f64,
    sample_rate_hz: u32,
    out_audio: *mut *mut VbAudio,
) -> VbStatus {
    guard(|| {
        let dst = out(out_audio)?;
        let room = RoomSpec::new(
            point(room_dims, "room dimensions")?,
            point(source, "source position")?,
            point(mic, "mic position")?,
            rt60_s,
            sample_rate_hz,
        );
        *dst = handle(generate_rir(&room)?);
        Ok(())
    })
}
