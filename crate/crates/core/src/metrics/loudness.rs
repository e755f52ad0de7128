use std::f64::consts::PI;

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

const BLOCK_S: f64 = 0.4;
const STEP_S: f64 = 0.1;
const ABSOLUTE_GATE: f64 = -70.0;
const RELATIVE_GATE: f64 = -10.0;
const OFFSET: f64 = -0.691;

/// Direct-form biquad, coefficients normalized so `a0 = 1`.
#[derive(Debug, Clone, Copy)]
struct Biquad {
    b: [f64; 3],
    a: [f64; 2],
}

impl Biquad {
    fn new(b: [f64; 3], a: [f64; 3]) -> Self {
        Biquad {
            b: b.map(|v| v / a[0]),
            a: [a[1] / a[0], a[2] / a[0]],
        }
    }

    fn run(&self, x: &[f64]) -> Vec<f64> {
        let (mut x1, mut x2, mut y1, mut y2) = (0.0, 0.0, 0.0, 0.0);
        x.iter()
            .map(|&v| {
                let y = self.b[0] * v + self.b[1] * x1 + self.b[2] * x2
                    - self.a[0] * y1
                    - self.a[1] * y2;
                x2 = x1;
                x1 = v;
                y2 = y1;
                y1 = y;
                y
            })
            .collect()
    }
}

/// K-weighting stages for sample rate `fs`: the head-related high shelf
/// followed by the RLB high-pass, both derived from analog prototypes so
/// that 48 kHz reproduces the published coefficient tables.
fn k_weighting(fs: u32) -> [Biquad; 2] {
    let fs = fs as f64;

    let (gain_db, q, fc) = (
        3.999_843_853_973_347,
        0.707_175_236_955_419_3,
        1_681.974_450_955_532,
    );
    let k = (PI * fc / fs).tan();
    let vh = 10f64.powf(gain_db / 20.0);
    let vb = vh.powf(0.499_666_774_154_541_6);
    let shelf = Biquad::new(
        [
            vh + vb * k / q + k * k,
            2.0 * (k * k - vh),
            vh - vb * k / q + k * k,
        ],
        [
            1.0 + k / q + k * k,
            2.0 * (k * k - 1.0),
            1.0 - k / q + k * k,
        ],
    );

    let (q, fc) = (0.500_327_037_325_395_3, 38.135_470_876_139_82);
    let k = (PI * fc / fs).tan();
    let a0 = 1.0 + k / q + k * k;
    let highpass = Biquad {
        b: [1.0, -2.0, 1.0],
        a: [2.0 * (k * k - 1.0) / a0, (1.0 - k / q + k * k) / a0],
    };
    [shelf, highpass]
}

/// Channel weights for 1-3 channels (L, R, C) and the 5.0 / 5.1 layouts
/// (L, R, C, [LFE], Ls, Rs).
fn channel_weights(channels: usize) -> Result<Vec<f64>> {
    match channels {
        1..=3 => Ok(vec![1.0; channels]),
        5 => Ok(vec![1.0, 1.0, 1.0, 1.41, 1.41]),
        6 => Ok(vec![1.0, 1.0, 1.0, 0.0, 1.41, 1.41]),
        n => Err(Error::InvalidBuffer(format!(
            "no loudness channel weighting for {n} channels"
        ))),
    }
}

/// Gated integrated loudness in LUFS.
///
/// K-weighted mean square over 400 ms blocks stepped by 100 ms, weighted
/// across channels, with the absolute gate at −70 LUFS and the relative
/// gate 10 LU below the loudness of the blocks passing the absolute gate.
pub fn loudness_lufs(audio: &AudioBuffer) -> Result<f64> {
    let fs = audio.sample_rate_hz();
    let weights = channel_weights(audio.channel_count())?;
    let block = (BLOCK_S * fs as f64).round() as usize;
    let step = (STEP_S * fs as f64).round() as usize;
    if audio.frames() < block {
        return Err(Error::TooShort(format!(
            "loudness needs at least one 400 ms block ({block} frames), got {}",
            audio.frames()
        )));
    }
    let stages = k_weighting(fs);
    let n_blocks = (audio.frames() - block) / step + 1;
    // z[c][j]: mean square of channel c in block j
    let z: Vec<Vec<f64>> = audio
        .channels()
        .map(|ch| {
            let y = stages[1].run(&stages[0].run(ch));
            (0..n_blocks)
                .map(|j| {
                    y[j * step..j * step + block]
                        .iter()
                        .map(|v| v * v)
                        .sum::<f64>()
                        / block as f64
                })
                .collect()
        })
        .collect();
    let weighted = |j: usize| -> f64 { z.iter().zip(&weights).map(|(zc, g)| g * zc[j]).sum() };
    let to_lufs = |power: f64| OFFSET + 10.0 * power.log10();

    let above_abs: Vec<usize> = (0..n_blocks)
        .filter(|&j| to_lufs(weighted(j)) > ABSOLUTE_GATE)
        .collect();
    if above_abs.is_empty() {
        return Err(Error::SilentOrGatedOut);
    }
    let mean_power = |blocks: &[usize]| -> f64 {
        blocks.iter().map(|&j| weighted(j)).sum::<f64>() / blocks.len() as f64
    };
    let relative = to_lufs(mean_power(&above_abs)) + RELATIVE_GATE;
    let gated: Vec<usize> = above_abs
        .into_iter()
        .filter(|&j| to_lufs(weighted(j)) > relative)
        .collect();
    if gated.is_empty() {
        return Err(Error::SilentOrGatedOut);
    }
    Ok(to_lufs(mean_power(&gated)))
}
