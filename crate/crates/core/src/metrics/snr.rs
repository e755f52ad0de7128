use super::{align, check_rate, common_length, dot, energy, ratio_db, Score, FLAG_LENGTH_TRIMMED};
use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

/// Plain SNR: `10·log10(Σref² / Σ(est − ref)²)`. Not scale invariant.
pub fn snr(reference: &AudioBuffer, estimate: &AudioBuffer) -> Result<Score> {
    let a = align(reference, estimate)?;
    let residual: f64 = a
        .reference
        .iter()
        .zip(a.estimate)
        .map(|(r, e)| (e - r) * (e - r))
        .sum();
    Ok(a.tag(ratio_db(energy(a.reference), residual)))
}

fn zero_mean(x: &[f64]) -> Vec<f64> {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| v - mean).collect()
}

fn si_snr_slices(reference: &[f64], estimate: &[f64]) -> Result<Score> {
    let r = zero_mean(reference);
    let e = zero_mean(estimate);
    let r_energy = energy(&r);
    if r_energy == 0.0 {
        return Err(Error::DegenerateSignal);
    }
    if e.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroEstimate);
    }
    let alpha = dot(&e, &r) / r_energy;
    let (mut target, mut noise) = (0.0, 0.0);
    for (rv, ev) in r.iter().zip(&e) {
        let t = alpha * rv;
        target += t * t;
        noise += (ev - t) * (ev - t);
    }
    Ok(ratio_db(target, noise))
}

/// Scale-invariant SNR. Both signals are made zero-mean, the estimate is
/// projected onto the reference, and the projection is compared with the
/// remainder. Negative gains are absorbed by the projection.
pub fn si_snr(reference: &AudioBuffer, estimate: &AudioBuffer) -> Result<Score> {
    let a = align(reference, estimate)?;
    Ok(a.tag(si_snr_slices(a.reference, a.estimate)?))
}

/// `si_snr(ref, est) − si_snr(ref, mixture)`, with all three signals trimmed
/// to one common length. Flags come from the estimate's score.
pub fn si_snr_improvement(
    mixture: &AudioBuffer,
    estimate: &AudioBuffer,
    reference: &AudioBuffer,
) -> Result<Score> {
    let r = reference.mono_samples()?;
    let e = estimate.mono_samples()?;
    let m = mixture.mono_samples()?;
    check_rate(reference, estimate)?;
    check_rate(reference, mixture)?;
    let n = common_length(&[r.len(), e.len(), m.len()], reference.sample_rate_hz())?;
    if n == 0 {
        return Err(Error::EmptySignal);
    }
    let trimmed = n != r.len() || n != e.len() || n != m.len();
    let est = si_snr_slices(&r[..n], &e[..n])?;
    let base = si_snr_slices(&r[..n], &m[..n])?;
    Ok(Score {
        value: est.value - base.value,
        flags: est.flags,
    }
    .flag_if(trimmed, FLAG_LENGTH_TRIMMED))
}
