use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use log::warn;

use super::AudioBuffer;
use crate::error::{Error, Result};

const FORMAT_PCM: u16 = 0x0001;
const FORMAT_IEEE_FLOAT: u16 = 0x0003;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

/// Sample encodings supported by [`write_wav`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WavEncoding {
    Pcm16,
    Pcm24,
    Pcm32,
    #[default]
    Float32,
}

impl WavEncoding {
    fn bits(self) -> u16 {
        match self {
            WavEncoding::Pcm16 => 16,
            WavEncoding::Pcm24 => 24,
            WavEncoding::Pcm32 | WavEncoding::Float32 => 32,
        }
    }

    fn format_tag(self) -> u16 {
        match self {
            WavEncoding::Float32 => FORMAT_IEEE_FLOAT,
            _ => FORMAT_PCM,
        }
    }
}

impl FromStr for WavEncoding {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "pcm16" => Ok(WavEncoding::Pcm16),
            "pcm24" => Ok(WavEncoding::Pcm24),
            "pcm32" => Ok(WavEncoding::Pcm32),
            "float32" => Ok(WavEncoding::Float32),
            other => Err(format!("unknown WAV encoding {other:?}")),
        }
    }
}

/// Result of a successful write.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WriteStats {
    /// Samples outside `[-1, 1]` that were clamped by an integer encoding.
    pub clipped: usize,
}

/// Format information from the `fmt ` chunk plus the frame count actually present.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WavHeader {
    pub format_tag: u16,
    pub channels: u16,
    pub sample_rate_hz: u32,
    pub bits_per_sample: u16,
    pub frames: usize,
}

impl WavHeader {
    pub fn duration_s(&self) -> f64 {
        self.frames as f64 / self.sample_rate_hz as f64
    }
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

struct Parsed<'a> {
    header: WavHeader,
    data: &'a [u8],
}

fn parse<'a>(bytes: &'a [u8], origin: &Path) -> Result<Parsed<'a>> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(Error::MalformedWav(format!(
            "{}: missing RIFF/WAVE signature",
            origin.display()
        )));
    }

    let mut fmt: Option<(u16, u16, u32, u16, u16)> = None;
    let mut data: Option<&[u8]> = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let declared = u32_at(bytes, pos + 4) as usize;
        let body_start = pos + 8;
        let available = bytes.len() - body_start;
        let size = if declared > available {
            if id == b"data" {
                warn!(
                    "{}: data chunk declares {declared} bytes but only {available} are present; using actual length",
                    origin.display()
                );
            }
            available
        } else {
            declared
        };
        let body = &bytes[body_start..body_start + size];
        match id {
            b"fmt " => {
                if body.len() < 16 {
                    return Err(Error::MalformedWav(format!(
                        "{}: fmt chunk is {} bytes, need at least 16",
                        origin.display(),
                        body.len()
                    )));
                }
                let mut tag = u16_at(body, 0);
                if tag == FORMAT_EXTENSIBLE {
                    if body.len() < 26 {
                        return Err(Error::MalformedWav(format!(
                            "{}: truncated WAVE_FORMAT_EXTENSIBLE header",
                            origin.display()
                        )));
                    }
                    // First two bytes of the sub-format GUID carry the real tag.
                    tag = u16_at(body, 24);
                }
                fmt = Some((
                    tag,
                    u16_at(body, 2),
                    u32_at(body, 4),
                    u16_at(body, 12),
                    u16_at(body, 14),
                ));
            }
            b"data" => {
                data = Some(body);
                // Anything after a data chunk whose size we had to correct is noise.
                if declared > available {
                    break;
                }
            }
            _ => {}
        }
        pos = body_start + size + (size & 1);
    }

    let (tag, channels, rate, block_align, bits) =
        fmt.ok_or_else(|| Error::MalformedWav(format!("{}: no fmt chunk", origin.display())))?;
    let data =
        data.ok_or_else(|| Error::MalformedWav(format!("{}: no data chunk", origin.display())))?;
    if channels == 0 || rate == 0 {
        return Err(Error::MalformedWav(format!(
            "{}: zero channels or sample rate",
            origin.display()
        )));
    }
    let supported = matches!(
        (tag, bits),
        (FORMAT_PCM, 16 | 24 | 32) | (FORMAT_IEEE_FLOAT, 32 | 64)
    );
    if !supported {
        return Err(Error::UnsupportedEncoding(format!(
            "{}: format tag {tag:#06x} with {bits} bits per sample",
            origin.display()
        )));
    }
    let frame_bytes = channels as usize * (bits as usize / 8);
    if block_align as usize != frame_bytes {
        return Err(Error::MalformedWav(format!(
            "{}: block align {block_align} does not match {channels} x {bits}-bit samples",
            origin.display()
        )));
    }
    if data.len() % frame_bytes != 0 {
        warn!(
            "{}: dropping {} trailing bytes of a partial frame",
            origin.display(),
            data.len() % frame_bytes
        );
    }
    let frames = data.len() / frame_bytes;
    Ok(Parsed {
        header: WavHeader {
            format_tag: tag,
            channels,
            sample_rate_hz: rate,
            bits_per_sample: bits,
            frames,
        },
        data: &data[..frames * frame_bytes],
    })
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    Ok(bytes)
}

/// Reads only the format description and frame count.
pub fn read_wav_header(path: impl AsRef<Path>) -> Result<WavHeader> {
    let path = path.as_ref();
    let bytes = read_bytes(path)?;
    Ok(parse(&bytes, path)?.header)
}

/// Reads a RIFF/WAVE file into a planar buffer.
///
/// Integer PCM is scaled by `1 / 2^(bits-1)`, so full-scale negative maps to
/// exactly -1.0. Float samples pass through unchanged.
pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    let path = path.as_ref();
    let bytes = read_bytes(path)?;
    let Parsed { header, data } = parse(&bytes, path)?;
    let channels = header.channels as usize;
    let width = header.bits_per_sample as usize / 8;
    let frames = header.frames;

    let decode: fn(&[u8]) -> f64 = match (header.format_tag, header.bits_per_sample) {
        (FORMAT_PCM, 16) => |b| i16::from_le_bytes([b[0], b[1]]) as f64 / 32768.0,
        (FORMAT_PCM, 24) => {
            |b| (i32::from_le_bytes([0, b[0], b[1], b[2]]) >> 8) as f64 / 8_388_608.0
        }
        (FORMAT_PCM, 32) => {
            |b| i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64 / 2_147_483_648.0
        }
        (FORMAT_IEEE_FLOAT, 32) => |b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
        (FORMAT_IEEE_FLOAT, 64) => {
            |b| f64::from_le_bytes([b[0], b[1], b[2], b[3], b[4], b[5], b[6], b[7]])
        }
        _ => unreachable!("rejected in parse"),
    };

    let mut planar = vec![0.0; frames * channels];
    for (frame, chunk) in data.chunks_exact(width * channels).enumerate() {
        for (ch, sample) in chunk.chunks_exact(width).enumerate() {
            planar[ch * frames + frame] = decode(sample);
        }
    }
    if planar.iter().any(|s| !s.is_finite()) {
        return Err(Error::MalformedWav(format!(
            "{}: file contains NaN or infinite samples",
            path.display()
        )));
    }
    AudioBuffer::from_planar(planar, channels, header.sample_rate_hz)
}

fn quantize(x: f64, bits: u32, clipped: &mut usize) -> i64 {
    if x.abs() > 1.0 {
        *clipped += 1;
    }
    let scale = (1i64 << (bits - 1)) as f64;
    let max = (1i64 << (bits - 1)) - 1;
    ((x * scale).round() as i64).clamp(-max - 1, max)
}

/// Writes `buffer` as an interleaved RIFF/WAVE file.
///
/// The file is written to a temporary sibling and renamed into place, so a
/// concurrent reader never sees a partial file.
pub fn write_wav(
    buffer: &AudioBuffer,
    path: impl AsRef<Path>,
    encoding: WavEncoding,
) -> Result<WriteStats> {
    let path = path.as_ref();
    let channels = buffer.channel_count();
    let frames = buffer.frames();
    let bits = encoding.bits();
    let width = bits as usize / 8;
    let data_len = frames * channels * width;
    if data_len > u32::MAX as usize - 36 {
        return Err(Error::InvalidBuffer(
            "buffer too large for a RIFF file".into(),
        ));
    }

    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len as u32).to_le_bytes());
    out.extend_from_slice(b"WAVEfmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&encoding.format_tag().to_le_bytes());
    out.extend_from_slice(&(channels as u16).to_le_bytes());
    out.extend_from_slice(&buffer.sample_rate_hz().to_le_bytes());
    let block_align = (channels * width) as u16;
    out.extend_from_slice(&(buffer.sample_rate_hz() * block_align as u32).to_le_bytes());
    out.extend_from_slice(&block_align.to_le_bytes());
    out.extend_from_slice(&bits.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());

    let mut stats = WriteStats::default();
    let samples = buffer.samples();
    for frame in 0..frames {
        for ch in 0..channels {
            let x = samples[ch * frames + frame];
            match encoding {
                WavEncoding::Float32 => out.extend_from_slice(&(x as f32).to_le_bytes()),
                WavEncoding::Pcm16 => {
                    let q = quantize(x, 16, &mut stats.clipped) as i16;
                    out.extend_from_slice(&q.to_le_bytes());
                }
                WavEncoding::Pcm24 => {
                    let q = quantize(x, 24, &mut stats.clipped) as i32;
                    out.extend_from_slice(&q.to_le_bytes()[..3]);
                }
                WavEncoding::Pcm32 => {
                    let q = quantize(x, 32, &mut stats.clipped) as i32;
                    out.extend_from_slice(&q.to_le_bytes());
                }
            }
        }
    }

    let file_name = path
        .file_name()
        .ok_or_else(|| Error::io(path, std::io::Error::other("path has no file name")))?;
    let tmp = path.with_file_name(format!(
        ".{}.tmp{}",
        file_name.to_string_lossy(),
        std::process::id()
    ));
    let result = File::create(&tmp).and_then(|f| {
        let mut w = BufWriter::new(f);
        w.write_all(&out)?;
        w.flush()
    });
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
    Ok(stats)
}
