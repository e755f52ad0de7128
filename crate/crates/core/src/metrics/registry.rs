use super::{
    bss_eval, loudness_lufs, lsd, mcd, si_snr, si_snr_improvement, snr, stoi, MetricReport, Score,
    DEFAULT_FILTER_LEN, DEFAULT_MCD_MELS, DEFAULT_MCD_ORDER,
};
use crate::audio::AudioBuffer;
use crate::dsp::StftConfig;
use crate::error::{Error, Result};

/// Names of the built-in metric outputs, in registry order.
pub const BUILTIN_METRICS: [&str; 10] = [
    "snr", "si_snr", "si_snri", "lsd", "stoi", "mcd", "bss_sdr", "bss_sir", "bss_sar", "lufs",
];

/// Signals available to a metric for one utterance.
#[derive(Debug, Clone, Copy)]
pub struct PairInput<'a> {
    pub reference: &'a AudioBuffer,
    pub estimate: &'a AudioBuffer,
    pub mixture: Option<&'a AudioBuffer>,
}

/// A metric family. One `compute` call yields one score per name in
/// `outputs`, so decompositions such as BSSEval run once per utterance.
pub trait Metric: Send + Sync {
    fn outputs(&self) -> &[&'static str];
    fn compute(&self, input: &PairInput<'_>) -> Result<Vec<Score>>;
}

struct FnMetric<F> {
    name: [&'static str; 1],
    f: F,
}

impl<F> Metric for FnMetric<F>
where
    F: Fn(&PairInput<'_>) -> Result<Score> + Send + Sync,
{
    fn outputs(&self) -> &[&'static str] {
        &self.name
    }

    fn compute(&self, input: &PairInput<'_>) -> Result<Vec<Score>> {
        Ok(vec![(self.f)(input)?])
    }
}

fn single<F>(name: &'static str, f: F) -> Box<dyn Metric>
where
    F: Fn(&PairInput<'_>) -> Result<Score> + Send + Sync + 'static,
{
    Box::new(FnMetric { name: [name], f })
}

struct BssMetric {
    filter_len: usize,
}

impl Metric for BssMetric {
    fn outputs(&self) -> &[&'static str] {
        &["bss_sdr", "bss_sir", "bss_sar"]
    }

    fn compute(&self, input: &PairInput<'_>) -> Result<Vec<Score>> {
        let refs = std::slice::from_ref(input.reference);
        let ests = std::slice::from_ref(input.estimate);
        let s = bss_eval(refs, ests, self.filter_len)?.remove(0)?;
        Ok(vec![s.sdr, s.sir, s.sar])
    }
}

/// Tunables of the built-in metrics.
#[derive(Debug, Clone)]
pub struct MetricOptions {
    /// LSD analysis; `None` picks the default for the signal's rate.
    pub lsd_stft: Option<StftConfig>,
    pub bss_filter_len: usize,
    pub mcd_mels: usize,
    pub mcd_order: usize,
}

impl Default for MetricOptions {
    fn default() -> Self {
        MetricOptions {
            lsd_stft: None,
            bss_filter_len: DEFAULT_FILTER_LEN,
            mcd_mels: DEFAULT_MCD_MELS,
            mcd_order: DEFAULT_MCD_ORDER,
        }
    }
}

/// Named metrics, evaluated with per-metric error isolation.
pub struct MetricRegistry {
    metrics: Vec<Box<dyn Metric>>,
}

impl Default for MetricRegistry {
    fn default() -> Self {
        Self::with_options(MetricOptions::default())
    }
}

impl MetricRegistry {
    pub fn empty() -> Self {
        MetricRegistry {
            metrics: Vec::new(),
        }
    }

    pub fn with_options(opts: MetricOptions) -> Self {
        let mut reg = Self::empty();
        reg.register(single("snr", |p| snr(p.reference, p.estimate)));
        reg.register(single("si_snr", |p| si_snr(p.reference, p.estimate)));
        reg.register(single("si_snri", |p| {
            let mix = p
                .mixture
                .ok_or_else(|| Error::MissingMixture("si_snri".into()))?;
            si_snr_improvement(mix, p.estimate, p.reference)
        }));
        let stft = opts.lsd_stft;
        reg.register(single("lsd", move |p| {
            let cfg =
                stft.unwrap_or_else(|| StftConfig::for_sample_rate(p.reference.sample_rate_hz()));
            lsd(p.reference, p.estimate, &cfg)
        }));
        reg.register(single("stoi", |p| stoi(p.reference, p.estimate)));
        let (mels, order) = (opts.mcd_mels, opts.mcd_order);
        reg.register(single("mcd", move |p| {
            mcd(p.reference, p.estimate, mels, order)
        }));
        reg.register(Box::new(BssMetric {
            filter_len: opts.bss_filter_len,
        }));
        reg.register(single("lufs", |p| {
            loudness_lufs(p.estimate).map(Score::new)
        }));
        reg
    }

    /// Adds a metric. Output names already present are shadowed by it.
    pub fn register(&mut self, metric: Box<dyn Metric>) {
        self.metrics.push(metric);
    }

    pub fn names(&self) -> Vec<&'static str> {
        let mut out: Vec<&'static str> = Vec::new();
        for m in &self.metrics {
            for &n in m.outputs() {
                if !out.contains(&n) {
                    out.push(n);
                }
            }
        }
        out
    }

    fn provider(&self, name: &str) -> Option<usize> {
        self.metrics
            .iter()
            .rposition(|m| m.outputs().contains(&name))
    }

    /// Fails with `UnknownMetric` on the first name no metric provides.
    pub fn validate<S: AsRef<str>>(&self, names: &[S]) -> Result<()> {
        match names.iter().find(|n| self.provider(n.as_ref()).is_none()) {
            Some(n) => Err(Error::UnknownMetric(n.as_ref().to_string())),
            None => Ok(()),
        }
    }

    /// Scores one utterance. A failing metric records an error for each of
    /// its requested outputs; the rest of the report is unaffected.
    pub fn evaluate<S: AsRef<str>>(
        &self,
        utterance_id: &str,
        input: &PairInput<'_>,
        names: &[S],
    ) -> Result<MetricReport> {
        self.validate(names)?;
        let mut report = MetricReport::new(utterance_id);
        let mut done: Vec<usize> = Vec::new();
        for name in names {
            let idx = self.provider(name.as_ref()).expect("validated above");
            if done.contains(&idx) {
                continue;
            }
            done.push(idx);
            let metric = &self.metrics[idx];
            let wanted = |out: &str| names.iter().any(|n| n.as_ref() == out);
            match metric.compute(input) {
                Ok(scores) => {
                    for (out, score) in metric.outputs().iter().zip(scores) {
                        if wanted(out) && self.provider(out) == Some(idx) {
                            report.insert(out, score);
                        }
                    }
                }
                Err(err) => {
                    for out in metric.outputs() {
                        if wanted(out) && self.provider(out) == Some(idx) {
                            report.insert_error(out, &err);
                        }
                    }
                }
            }
        }
        Ok(report)
    }
}

/// Scores `estimate` against `reference` with the default registry.
pub fn score_pair<S: AsRef<str>>(
    reference: &AudioBuffer,
    estimate: &AudioBuffer,
    metric_set: &[S],
) -> Result<MetricReport> {
    let input = PairInput {
        reference,
        estimate,
        mixture: None,
    };
    MetricRegistry::default().evaluate("", &input, metric_set)
}
