use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Analysis window shapes. All are periodic (DFT-even).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    Hann,
    Hamming,
    SqrtHann,
}

impl WindowKind {
    pub fn generate(self, len: usize) -> Vec<f64> {
        let hann = |n: usize| 0.5 - 0.5 * (2.0 * PI * n as f64 / len as f64).cos();
        (0..len)
            .map(|n| match self {
                WindowKind::Hann => hann(n),
                WindowKind::Hamming => 0.54 - 0.46 * (2.0 * PI * n as f64 / len as f64).cos(),
                WindowKind::SqrtHann => hann(n).sqrt(),
            })
            .collect()
    }
}

impl FromStr for WindowKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hann" => Ok(WindowKind::Hann),
            "hamming" => Ok(WindowKind::Hamming),
            "sqrt_hann" => Ok(WindowKind::SqrtHann),
            _ => Err(format!("unknown window {s:?}")),
        }
    }
}

impl fmt::Display for WindowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WindowKind::Hann => "hann",
            WindowKind::Hamming => "hamming",
            WindowKind::SqrtHann => "sqrt_hann",
        })
    }
}

/// Zeroth-order modified Bessel function of the first kind (power series).
pub(crate) fn bessel_i0(x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= (half / k as f64) * (half / k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Symmetric Kaiser window of odd or even length.
pub(crate) fn kaiser(len: usize, beta: f64) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    let denom = bessel_i0(beta);
    let m = (len - 1) as f64;
    (0..len)
        .map(|n| {
            let r = 2.0 * n as f64 / m - 1.0;
            bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / denom
        })
        .collect()
}

/// Kaiser's empirical β for a stopband attenuation of `atten_db`.
pub(crate) fn kaiser_beta(atten_db: f64) -> f64 {
    if atten_db > 50.0 {
        0.1102 * (atten_db - 8.7)
    } else if atten_db >= 21.0 {
        0.5842 * (atten_db - 21.0).powf(0.4) + 0.07886 * (atten_db - 21.0)
    } else {
        0.0
    }
}

/// Kaiser's length estimate, rounded up to an odd tap count so the filter
/// has an integer group delay. `transition` is in cycles per sample.
pub(crate) fn kaiser_taps(atten_db: f64, transition: f64) -> usize {
    let n = ((atten_db - 7.95) / (2.285 * 2.0 * PI * transition))
        .ceil()
        .max(1.0) as usize
        + 1;
    n | 1
}

pub(crate) fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Windowed-sinc low-pass prototype with unit DC gain.
/// `cutoff` is the -6 dB point in cycles per sample (at most 0.5).
pub(crate) fn lowpass_kernel(taps: usize, cutoff: f64, beta: f64) -> Vec<f64> {
    let center = (taps - 1) as f64 / 2.0;
    let window = kaiser(taps, beta);
    let mut h: Vec<f64> = window
        .iter()
        .enumerate()
        .map(|(n, w)| 2.0 * cutoff * sinc(2.0 * cutoff * (n as f64 - center)) * w)
        .collect();
    let dc: f64 = h.iter().sum();
    h.iter_mut().for_each(|v| *v /= dc);
    h
}
