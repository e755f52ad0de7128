use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::SimRng;
use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

pub const DEFAULT_SOUND_SPEED_MPS: f64 = 343.0;
/// Half-width of the fractional-delay kernel; the kernel has `2·40 + 1` taps.
const KERNEL_HALF: i64 = 40;
const HIGHPASS_HZ: f64 = 100.0;
const MIN_SOURCE_MIC_DISTANCE_M: f64 = 0.01;

/// Wall behaviour: a target reverberation time or explicit pressure
/// reflection coefficients in the order x=0, x=L, y=0, y=W, z=0, z=H.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Walls {
    Rt60S(f64),
    ReflectionCoeffs([f64; 6]),
}

/// A shoebox room with one omnidirectional source and microphone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoomSpec {
    pub dimensions_m: [f64; 3],
    pub source_pos_m: [f64; 3],
    pub mic_pos_m: [f64; 3],
    pub walls: Walls,
    /// Highest reflection order; `None` keeps every image that arrives
    /// within the response length.
    #[serde(default)]
    pub max_order: Option<u32>,
    pub sample_rate_hz: u32,
    #[serde(default = "default_sound_speed")]
    pub sound_speed_mps: f64,
    pub rir_length_samples: usize,
}

fn default_sound_speed() -> f64 {
    DEFAULT_SOUND_SPEED_MPS
}

impl RoomSpec {
    /// Room with every order kept and a response long enough for the tail to
    /// fall well below −60 dB (1.5 × RT60, at least 0.1 s).
    pub fn new(
        dimensions_m: [f64; 3],
        source_pos_m: [f64; 3],
        mic_pos_m: [f64; 3],
        rt60_s: f64,
        sample_rate_hz: u32,
    ) -> Self {
        RoomSpec {
            dimensions_m,
            source_pos_m,
            mic_pos_m,
            walls: Walls::Rt60S(rt60_s),
            max_order: None,
            sample_rate_hz,
            sound_speed_mps: DEFAULT_SOUND_SPEED_MPS,
            rir_length_samples: default_length(rt60_s, sample_rate_hz),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidRoom(msg));
        if self
            .dimensions_m
            .iter()
            .any(|&d| !(d.is_finite() && d > 0.0))
        {
            return bad(format!(
                "dimensions must be positive, got {:?}",
                self.dimensions_m
            ));
        }
        for (name, p) in [
            ("source", self.source_pos_m),
            ("microphone", self.mic_pos_m),
        ] {
            if p.iter()
                .zip(&self.dimensions_m)
                .any(|(&x, &d)| !(x > 0.0 && x < d))
            {
                return bad(format!(
                    "{name} position {p:?} is not strictly inside the room"
                ));
            }
        }
        if distance(&self.source_pos_m, &self.mic_pos_m) < MIN_SOURCE_MIC_DISTANCE_M {
            return bad("source and microphone coincide".into());
        }
        match self.walls {
            Walls::Rt60S(t) if !(t.is_finite() && t > 0.0) => {
                return bad(format!("RT60 must be positive, got {t}"))
            }
            Walls::ReflectionCoeffs(b) if b.iter().any(|&v| !(0.0..1.0).contains(&v)) => {
                return bad(format!(
                    "reflection coefficients must lie in [0, 1), got {b:?}"
                ))
            }
            _ => {}
        }
        if self.sample_rate_hz == 0 || self.rir_length_samples == 0 {
            return bad("sample rate and response length must be positive".into());
        }
        if !(self.sound_speed_mps.is_finite() && self.sound_speed_mps > 0.0) {
            return bad(format!(
                "sound speed must be positive, got {}",
                self.sound_speed_mps
            ));
        }
        Ok(())
    }

    /// Source-microphone distance in metres.
    pub fn direct_distance_m(&self) -> f64 {
        distance(&self.source_pos_m, &self.mic_pos_m)
    }

    /// Random room for reverberant data: 3-10 × 3-8 × 2.5-4 m, RT60 0.2-1.0 s,
    /// both positions at least 0.5 m from every wall and from each other.
    pub fn sample(rng: &mut SimRng, sample_rate_hz: u32) -> Self {
        let dims = [
            rng.uniform_range(3.0, 10.0),
            rng.uniform_range(3.0, 8.0),
            rng.uniform_range(2.5, 4.0),
        ];
        let rt60 = rng.uniform_range(0.2, 1.0);
        let point = |rng: &mut SimRng| dims.map(|d| rng.uniform_range(0.5, d - 0.5));
        let source = point(rng);
        let mut mic = point(rng);
        while distance(&source, &mic) < 0.5 {
            mic = point(rng);
        }
        RoomSpec::new(dims, source, mic, rt60, sample_rate_hz)
    }
}

fn default_length(rt60_s: f64, fs: u32) -> usize {
    ((1.5 * rt60_s).max(0.1) * fs as f64).ceil() as usize
}

fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Uniform pressure reflection coefficient for `rt60_s` by Sabine
/// inversion: `α = 0.161·V / (S·RT60)`, `β = sqrt(1 − α)`.
pub fn sabine_reflection(dimensions_m: [f64; 3], rt60_s: f64) -> Result<f64> {
    let [l, w, h] = dimensions_m;
    let volume = l * w * h;
    let surface = 2.0 * (l * w + l * h + w * h);
    let alpha = 0.161 * volume / (surface * rt60_s);
    if !(alpha < 1.0) {
        return Err(Error::UnachievableRT60 { rt60_s, alpha });
    }
    Ok((1.0 - alpha).sqrt())
}

/// The six wall reflection coefficients of `room`.
pub fn rt60_to_reflection(room: &RoomSpec) -> Result<[f64; 6]> {
    match room.walls {
        Walls::Rt60S(t) => {
            if !(t > 0.0) {
                return Err(Error::InvalidRoom(format!(
                    "RT60 must be positive, got {t}"
                )));
            }
            Ok([sabine_reflection(room.dimensions_m, t)?; 6])
        }
        Walls::ReflectionCoeffs(b) => Ok(b),
    }
}

/// Image-source room impulse response.
///
/// Every image up to `max_order` contributes `∏β / (4π·d)` at delay `d/c`,
/// placed with an 81-tap Hann-windowed sinc. A 100 Hz high-pass then removes
/// the DC build-up of the image sum.
pub fn generate_rir(room: &RoomSpec) -> Result<AudioBuffer> {
    room.validate()?;
    let beta = rt60_to_reflection(room)?;
    let fs = room.sample_rate_hz as f64;
    let len = room.rir_length_samples;
    let samples_per_m = fs / room.sound_speed_mps;
    let mut h = vec![0.0; len];

    // Per axis: reach in room-lengths, then (offset, wall hits) per image.
    let reach = |d: f64| (len as f64 / (2.0 * d * samples_per_m)).ceil() as i64 + 1;
    let axis_images = |axis: usize| -> Vec<(f64, i64, f64)> {
        let d = room.dimensions_m[axis];
        let s = room.source_pos_m[axis];
        let r = room.mic_pos_m[axis];
        let (b0, b1) = (beta[2 * axis], beta[2 * axis + 1]);
        let n = reach(d);
        let mut out = Vec::new();
        for m in -n..=n {
            for q in 0..=1i64 {
                let offset = (1 - 2 * q) as f64 * s - r + 2.0 * m as f64 * d;
                let order = (2 * m - q).abs();
                let gain =
                    b0.powi((m - q).unsigned_abs() as i32) * b1.powi(m.unsigned_abs() as i32);
                out.push((offset, order, gain));
            }
        }
        out
    };
    let (xs, ys, zs) = (axis_images(0), axis_images(1), axis_images(2));
    let limit = room.max_order.map(|o| o as i64);
    let horizon = (len as i64 + KERNEL_HALF) as f64;
    let taper = Taper::new();

    for &(dx, ox, gx) in &xs {
        for &(dy, oy, gy) in &ys {
            if limit.is_some_and(|l| ox + oy > l) {
                continue;
            }
            for &(dz, oz, gz) in &zs {
                if limit.is_some_and(|l| ox + oy + oz > l) {
                    continue;
                }
                let dist_m = (dx * dx + dy * dy + dz * dz).sqrt();
                let delay = dist_m * samples_per_m;
                if delay >= horizon {
                    continue;
                }
                let gain = gx * gy * gz / (4.0 * PI * dist_m);
                if gain == 0.0 {
                    continue;
                }
                place_kernel(&mut h, delay, gain, &taper);
            }
        }
    }
    highpass_in_place(&mut h, fs);
    AudioBuffer::mono(h, room.sample_rate_hz)
}

/// `cos` and `sin` of `πk/(K+1)` for the kernel offsets `k = −K..=K`, so
/// the per-image window needs only one angle-difference step per tap.
struct Taper {
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl Taper {
    fn new() -> Self {
        let step = PI / (KERNEL_HALF + 1) as f64;
        let angles = (-KERNEL_HALF..=KERNEL_HALF).map(|k| k as f64 * step);
        Taper {
            cos: angles.clone().map(f64::cos).collect(),
            sin: angles.map(f64::sin).collect(),
        }
    }
}

/// Adds `gain` times the Hann-windowed sinc centred at fractional sample
/// `delay`. With `t = k − frac`, `sin(πt) = −(−1)^k·sin(π·frac)` and the
/// window angle splits as `πk/(K+1) − π·frac/(K+1)`.
fn place_kernel(h: &mut [f64], delay: f64, gain: f64, taper: &Taper) {
    let centre = delay.floor() as i64;
    let frac = delay - centre as f64;
    let sin_frac = (PI * frac).sin();
    let b = PI * frac / (KERNEL_HALF + 1) as f64;
    let (cos_b, sin_b) = (b.cos(), b.sin());
    for (i, k) in (-KERNEL_HALF..=KERNEL_HALF).enumerate() {
        let idx = centre + k;
        if idx < 0 || idx >= h.len() as i64 {
            continue;
        }
        let t = k as f64 - frac;
        let s = if t == 0.0 {
            1.0
        } else {
            let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
            sign * sin_frac / (PI * t)
        };
        let w = 0.5 * (1.0 + taper.cos[i] * cos_b + taper.sin[i] * sin_b);
        h[idx as usize] += gain * w * s;
    }
}

/// Second-order 100 Hz high-pass of the original image-method paper.
fn highpass_in_place(x: &mut [f64], fs: f64) {
    let w = 2.0 * PI * HIGHPASS_HZ / fs;
    let r1 = (-w).exp();
    let b1 = 2.0 * r1 * w.cos();
    let b2 = -r1 * r1;
    let a1 = -(1.0 + r1);
    let mut y = [0.0; 3];
    for v in x.iter_mut() {
        y[2] = y[1];
        y[1] = y[0];
        y[0] = b1 * y[1] + b2 * y[2] + *v;
        *v = y[0] + a1 * y[1] + r1 * y[2];
    }
}

/// Reverberation time from Schroeder backward integration: a least-squares
/// line through the energy decay curve between −5 and −25 dB, extrapolated
/// to −60 dB. `None` when the decay never reaches −25 dB.
pub fn schroeder_rt60(h: &[f64], sample_rate_hz: u32) -> Option<f64> {
    let mut edc = vec![0.0; h.len()];
    let mut acc = 0.0;
    for (e, v) in edc.iter_mut().zip(h).rev() {
        acc += v * v;
        *e = acc;
    }
    let total = *edc.first()?;
    if total <= 0.0 {
        return None;
    }
    let pts: Vec<(f64, f64)> = edc
        .iter()
        .enumerate()
        .map(|(n, &e)| (n as f64 / sample_rate_hz as f64, 10.0 * (e / total).log10()))
        .filter(|&(_, db)| (-25.0..=-5.0).contains(&db))
        .collect();
    if pts.len() < 2 || edc.iter().all(|&e| 10.0 * (e / total).log10() > -25.0) {
        return None;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let md = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let cov: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - md)).sum();
    let var: f64 = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
    let slope = cov / var;
    (slope < 0.0).then(|| -60.0 / slope)
}
