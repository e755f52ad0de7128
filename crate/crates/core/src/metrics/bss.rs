use nalgebra::{DMatrix, DVector};

use super::{check_rate, common_length, dot, energy, ratio_db, Score, FLAG_LENGTH_TRIMMED};
use crate::audio::AudioBuffer;
use crate::dsp::{convolve, xcorr_positive};
use crate::error::{Error, Result};

pub const DEFAULT_FILTER_LEN: usize = 512;
const DAMPING: f64 = 1e-10;
/// Squared cosine above which two references count as the same signal.
const COLLINEAR: f64 = 1.0 - 1e-12;

/// Source-to-distortion, -interference and -artifact ratios of one estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct BssScores {
    pub sdr: Score,
    pub sir: Score,
    pub sar: Score,
}

/// Delayed-copy basis of a set of references with its damped Cholesky factor.
struct Projector<'a> {
    refs: Vec<&'a [f64]>,
    filter_len: usize,
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
}

impl<'a> Projector<'a> {
    fn new(refs: Vec<&'a [f64]>, filter_len: usize) -> Result<Self> {
        let l = filter_len;
        let k = refs.len();
        // c[i][j][d] = Σ_u r_i[u] r_j[u + d]
        let c: Vec<Vec<Vec<f64>>> = refs
            .iter()
            .map(|ri| refs.iter().map(|rj| xcorr_positive(ri, rj, l)).collect())
            .collect();
        // <shift(r_i, a), shift(r_j, b)> = c[i][j][a - b] for a ≥ b, c[j][i][b - a] otherwise
        let mut g = DMatrix::from_fn(k * l, k * l, |row, col| {
            let (i, a) = (row / l, row % l);
            let (j, b) = (col / l, col % l);
            if a >= b {
                c[i][j][a - b]
            } else {
                c[j][i][b - a]
            }
        });
        let lambda = DAMPING * g.trace();
        for d in 0..k * l {
            g[(d, d)] += lambda;
        }
        let chol = g.cholesky().ok_or_else(|| {
            Error::SingularProjection("projection system is not positive definite".into())
        })?;
        Ok(Projector {
            refs,
            filter_len,
            chol,
        })
    }

    /// Least-squares projection of `e` onto the span of all delayed
    /// references, as a signal of length `len(e) + filter_len − 1`.
    fn project(&self, e: &[f64]) -> Vec<f64> {
        let l = self.filter_len;
        let mut b = DVector::zeros(self.refs.len() * l);
        for (i, r) in self.refs.iter().enumerate() {
            for (a, v) in xcorr_positive(r, e, l).into_iter().enumerate() {
                b[i * l + a] = v;
            }
        }
        let x = self.chol.solve(&b);
        let mut out = vec![0.0; e.len() + l - 1];
        for (i, r) in self.refs.iter().enumerate() {
            let taps = &x.as_slice()[i * l..(i + 1) * l];
            for (o, v) in out.iter_mut().zip(convolve(r, taps)) {
                *o += v;
            }
        }
        out
    }
}

/// BSSEval v3 decomposition of each estimate against its reference.
///
/// `ests[j]` is scored against `refs[j]`. Each estimate is projected by
/// least squares onto delayed copies (`0..filter_len` samples) of its own
/// reference (`s_target`) and of all references; the difference is the
/// interference and the remainder the artifacts. The normal equations are
/// damped by `1e-10 · trace` and solved by Cholesky.
///
/// Per-source failures (zero reference, zero estimate, a reference that
/// duplicates another) are returned in place; the other sources are still
/// scored, with duplicates kept once in the interference basis.
pub fn bss_eval(
    refs: &[AudioBuffer],
    ests: &[AudioBuffer],
    filter_len: usize,
) -> Result<Vec<Result<BssScores>>> {
    if refs.is_empty() {
        return Err(Error::EmptyInput);
    }
    if refs.len() != ests.len() {
        return Err(Error::SourceCountMismatch {
            references: refs.len(),
            estimates: ests.len(),
        });
    }
    if filter_len == 0 {
        return Err(Error::InvalidBuffer(
            "filter length must be positive".into(),
        ));
    }
    let fs = refs[0].sample_rate_hz();
    let mut r = Vec::with_capacity(refs.len());
    let mut e = Vec::with_capacity(ests.len());
    for (rb, eb) in refs.iter().zip(ests) {
        check_rate(&refs[0], rb)?;
        check_rate(&refs[0], eb)?;
        r.push(rb.mono_samples()?);
        e.push(eb.mono_samples()?);
    }
    let lengths: Vec<usize> = r.iter().chain(&e).map(|x| x.len()).collect();
    let n = common_length(&lengths, fs)?;
    if n == 0 {
        return Err(Error::EmptySignal);
    }
    let trimmed = lengths.iter().any(|&len| len != n);
    let r: Vec<&[f64]> = r.iter().map(|x| &x[..n]).collect();
    let e: Vec<&[f64]> = e.iter().map(|x| &x[..n]).collect();

    // Which references enter the shared basis, and per-source problems.
    let energies: Vec<f64> = r.iter().map(|x| energy(x)).collect();
    let mut status: Vec<Option<Error>> = energies
        .iter()
        .map(|&en| (en == 0.0).then_some(Error::DegenerateSignal))
        .collect();
    let mut basis: Vec<usize> = Vec::new();
    for i in 0..r.len() {
        if status[i].is_some() {
            continue;
        }
        let twin = basis.iter().copied().find(|&j| {
            let d = dot(r[i], r[j]);
            d * d >= COLLINEAR * energies[i] * energies[j]
        });
        match twin {
            Some(j) => {
                let msg = format!("references {j} and {i} are identical up to scale");
                status[i] = Some(Error::SingularProjection(msg.clone()));
                status[j] = Some(Error::SingularProjection(msg));
            }
            None => basis.push(i),
        }
    }
    if basis.is_empty() {
        return Ok(status
            .into_iter()
            .map(|s| Err(s.unwrap_or(Error::DegenerateSignal)))
            .collect());
    }
    let all = Projector::new(basis.iter().map(|&i| r[i]).collect(), filter_len)?;

    let mut out = Vec::with_capacity(r.len());
    for (j, problem) in status.into_iter().enumerate() {
        if let Some(err) = problem {
            out.push(Err(err));
            continue;
        }
        if e[j].iter().all(|&v| v == 0.0) {
            out.push(Err(Error::ZeroEstimate));
            continue;
        }
        let scores = Projector::new(vec![r[j]], filter_len).map(|own| {
            let s_target = own.project(e[j]);
            let p_all = all.project(e[j]);
            let mut padded = e[j].to_vec();
            padded.resize(n + filter_len - 1, 0.0);
            let s_energy = energy(&s_target);
            let (mut distortion, mut interf, mut artif) = (0.0, 0.0, 0.0);
            for ((&x, &s), &p) in padded.iter().zip(&s_target).zip(&p_all) {
                distortion += (x - s) * (x - s);
                interf += (p - s) * (p - s);
                artif += (x - p) * (x - p);
            }
            let tag = |sc: Score| sc.flag_if(trimmed, FLAG_LENGTH_TRIMMED);
            BssScores {
                sdr: tag(ratio_db(s_energy, distortion)),
                sir: tag(ratio_db(s_energy, interf)),
                sar: tag(ratio_db(energy(&p_all), artif)),
            }
        });
        out.push(scores);
    }
    Ok(out)
}
