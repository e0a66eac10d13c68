//! Noiseless confidence statistics over labeled logit datasets.
//!
//! Everything here is a pure function of immutable data. The private-source layer
//! in [`crate::protocol`] evaluates these on its own shard and noises the result.

use crate::{Error, Result};

/// Default bin count for ECE and histogram binning.
pub const DEFAULT_BINS: usize = 15;

/// Default per-sample NLL clip; equals the declared sensitivity of the NLL query.
pub const DEFAULT_NLL_CLIP: f64 = 10.0;

/// One sample: raw logits (one per class) and its ground-truth label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledLogits {
    logits: Vec<f64>,
    label: usize,
}

impl LabeledLogits {
    pub fn new(logits: Vec<f64>, label: usize) -> Result<Self> {
        if logits.len() < 2 {
            return Err(Error::TooFewClasses(logits.len()));
        }
        if let Some((index, &value)) = logits.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteLogit { index, value });
        }
        if label >= logits.len() {
            return Err(Error::LabelOutOfRange {
                label,
                classes: logits.len(),
            });
        }
        Ok(Self { logits, label })
    }

    pub fn logits(&self) -> &[f64] {
        &self.logits
    }

    pub fn label(&self) -> usize {
        self.label
    }

    pub fn classes(&self) -> usize {
        self.logits.len()
    }

    fn max_logit(&self) -> f64 {
        self.logits[predict_label(self)]
    }

    /// Σ_j exp((l_j − l_max)/T). Always ≥ 1 since the max term is exp(0).
    fn partition(&self, temperature: f64) -> f64 {
        let max = self.max_logit();
        self.logits
            .iter()
            .map(|&l| ((l - max) / temperature).exp())
            .sum()
    }

    pub(crate) fn confidence_unchecked(&self, temperature: f64) -> f64 {
        1.0 / self.partition(temperature)
    }

    fn nll_unchecked(&self, temperature: f64) -> f64 {
        let max = self.max_logit();
        self.partition(temperature).ln() - (self.logits[self.label] - max) / temperature
    }

    pub fn is_correct(&self) -> bool {
        predict_label(self) == self.label
    }
}

/// An ordered collection of samples sharing one class count.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    samples: Vec<LabeledLogits>,
}

impl Dataset {
    pub fn new(samples: Vec<LabeledLogits>) -> Result<Self> {
        if let Some(first) = samples.first() {
            let expected = first.classes();
            if let Some((index, s)) = samples
                .iter()
                .enumerate()
                .find(|(_, s)| s.classes() != expected)
            {
                return Err(Error::ClassCountMismatch {
                    index,
                    expected,
                    found: s.classes(),
                });
            }
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[LabeledLogits] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Class count, or `None` for an empty dataset.
    pub fn classes(&self) -> Option<usize> {
        self.samples.first().map(LabeledLogits::classes)
    }

    /// Builds a dataset from a subset of sample indices, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
        }
    }

    pub fn into_samples(self) -> Vec<LabeledLogits> {
        self.samples
    }

    fn non_empty(&self) -> Result<&[LabeledLogits]> {
        if self.samples.is_empty() {
            Err(Error::EmptyDataset)
        } else {
            Ok(&self.samples)
        }
    }
}

/// Equal-width partition of [0, 1] into `k` bins, half-open except the last.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinningScheme {
    bins: usize,
}

impl BinningScheme {
    pub fn new(bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::ZeroBins);
        }
        Ok(Self { bins })
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    /// `[lower, upper)` bounds of bin `i` (the last bin also contains 1.0).
    pub fn bounds(&self, i: usize) -> (f64, f64) {
        let k = self.bins as f64;
        (i as f64 / k, (i + 1) as f64 / k)
    }

    pub fn bin_index(&self, confidence: f64) -> Result<usize> {
        bin_index(confidence, self)
    }
}

impl Default for BinningScheme {
    fn default() -> Self {
        Self {
            bins: DEFAULT_BINS,
        }
    }
}

/// Per-bin tallies of sample count, correct count and summed confidence.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceStats {
    pub n_bin: Vec<usize>,
    pub n_correct: Vec<usize>,
    pub conf_sum: Vec<f64>,
    pub n_total: usize,
}

impl ConfidenceStats {
    pub fn empty(scheme: &BinningScheme) -> Self {
        let k = scheme.bins();
        Self {
            n_bin: vec![0; k],
            n_correct: vec![0; k],
            conf_sum: vec![0.0; k],
            n_total: 0,
        }
    }

    /// Tallies `(confidence, correct)` pairs in iteration order.
    pub fn from_pairs<I>(pairs: I, scheme: &BinningScheme) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, bool)>,
    {
        let mut stats = Self::empty(scheme);
        for (c, correct) in pairs {
            let b = bin_index(c, scheme)?;
            stats.n_bin[b] += 1;
            stats.n_correct[b] += usize::from(correct);
            stats.conf_sum[b] += c;
            stats.n_total += 1;
        }
        Ok(stats)
    }

    pub fn bins(&self) -> usize {
        self.n_bin.len()
    }

    /// Per-bin `n_correct − conf_sum`.
    pub fn residuals(&self) -> Vec<f64> {
        self.n_correct
            .iter()
            .zip(&self.conf_sum)
            .map(|(&nc, &cs)| nc as f64 - cs)
            .collect()
    }

    /// Σ_bins |n_correct − conf_sum| / n_total.
    pub fn ece(&self) -> Result<f64> {
        if self.n_total == 0 {
            return Err(Error::EmptyDataset);
        }
        let total: f64 = self.residuals().iter().map(|r| r.abs()).sum();
        Ok(total / self.n_total as f64)
    }
}

fn check_temperature(temperature: f64) -> Result<()> {
    if temperature > 0.0 && temperature.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidTemperature(temperature))
    }
}

/// Index of the largest logit; ties go to the lowest index.
pub fn predict_label(sample: &LabeledLogits) -> usize {
    let mut best = 0;
    for (i, &l) in sample.logits.iter().enumerate().skip(1) {
        if l > sample.logits[best] {
            best = i;
        }
    }
    best
}

/// Full temperature-scaled softmax vector.
pub fn softmax(sample: &LabeledLogits, temperature: f64) -> Result<Vec<f64>> {
    check_temperature(temperature)?;
    let max = sample.max_logit();
    let exps: Vec<f64> = sample
        .logits
        .iter()
        .map(|&l| ((l - max) / temperature).exp())
        .collect();
    let z: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / z).collect())
}

/// Largest softmax probability at temperature `T`.
pub fn confidence(sample: &LabeledLogits, temperature: f64) -> Result<f64> {
    check_temperature(temperature)?;
    Ok(sample.confidence_unchecked(temperature))
}

pub fn accuracy(data: &Dataset) -> Result<f64> {
    let samples = data.non_empty()?;
    let correct = samples.iter().filter(|s| s.is_correct()).count();
    Ok(correct as f64 / samples.len() as f64)
}

pub fn average_confidence(data: &Dataset, temperature: f64) -> Result<f64> {
    let samples = data.non_empty()?;
    check_temperature(temperature)?;
    let total: f64 = samples
        .iter()
        .map(|s| s.confidence_unchecked(temperature))
        .sum();
    Ok(total / samples.len() as f64)
}

/// Σ over samples of min(clip, −log softmax_T(l)[y]).
///
/// The clip bounds each sample's contribution, so the query's L1 sensitivity is `clip`.
/// Pass `f64::INFINITY` for the unclipped sum.
pub fn nll_sum(data: &Dataset, temperature: f64, clip: f64) -> Result<f64> {
    let samples = data.non_empty()?;
    check_temperature(temperature)?;
    if clip.is_nan() || clip <= 0.0 {
        return Err(Error::InvalidClip(clip));
    }
    Ok(samples
        .iter()
        .map(|s| s.nll_unchecked(temperature).min(clip))
        .sum())
}

/// Σ over samples of (1[correct] − confidence_T). Its absolute value is the
/// unnormalized consistency gap |Acc − Conf|·n.
pub fn consistency_gap_sum(data: &Dataset, temperature: f64) -> Result<f64> {
    let samples = data.non_empty()?;
    check_temperature(temperature)?;
    Ok(samples
        .iter()
        .map(|s| f64::from(u8::from(s.is_correct())) - s.confidence_unchecked(temperature))
        .sum())
}

/// `floor(c·k)`, with 1.0 landing in the last bin.
pub fn bin_index(confidence: f64, scheme: &BinningScheme) -> Result<usize> {
    if !(0.0..=1.0).contains(&confidence) {
        return Err(Error::ConfidenceOutOfRange(confidence));
    }
    let k = scheme.bins();
    Ok(((confidence * k as f64) as usize).min(k - 1))
}

pub fn confidence_stats(
    data: &Dataset,
    temperature: f64,
    scheme: &BinningScheme,
) -> Result<ConfidenceStats> {
    let samples = data.non_empty()?;
    check_temperature(temperature)?;
    ConfidenceStats::from_pairs(
        samples
            .iter()
            .map(|s| (s.confidence_unchecked(temperature), s.is_correct())),
        scheme,
    )
}

/// Binned expected calibration error at temperature `T`.
pub fn ece(data: &Dataset, temperature: f64, scheme: &BinningScheme) -> Result<f64> {
    confidence_stats(data, temperature, scheme)?.ece()
}
