//! Private recalibration methods and the models they produce.
//!
//! The temperature methods ([`nll_t`], [`ece_t`], [`acc_t`]) each drive one
//! golden-section search whose every evaluation is a broadcast query to all sources
//! followed by an unweighted mean. [`hist_bin`] issues a single tally query.
//! [`exact`] holds the same methods without the protocol layer.

pub mod exact;

use std::fmt;
use std::str::FromStr;

use crate::calibration::{self, BinningScheme, ConfidenceStats, Dataset, LabeledLogits};
use crate::dp::Epsilon;
use crate::protocol::{self, PrivateSource, QueryKind, QuerySpec};
use crate::search::{golden_section, Direction, SearchConfig};
use crate::{Error, Result};

/// Averaged bin mass at or below which a noisy histogram bin is treated as empty.
pub const DEFAULT_HIST_MIN_MASS: f64 = 0.5;

/// A confidence transform applied on top of fixed logits. Predicted labels never change.
#[derive(Debug, Clone, PartialEq)]
pub enum RecalibratedModel {
    /// Softmax at temperature T.
    Temperature(f64),
    /// Bin the T = 1 confidence and replace it with the bin's value; `None` keeps the
    /// original confidence.
    BinRemap {
        scheme: BinningScheme,
        remap: Vec<Option<f64>>,
    },
}

impl RecalibratedModel {
    pub fn identity() -> Self {
        Self::Temperature(1.0)
    }

    pub fn temperature(&self) -> Option<f64> {
        match self {
            Self::Temperature(t) => Some(*t),
            Self::BinRemap { .. } => None,
        }
    }

    /// `(predicted label, recalibrated confidence)` for one sample.
    pub fn apply(&self, sample: &LabeledLogits) -> (usize, f64) {
        let label = calibration::predict_label(sample);
        let conf = match self {
            Self::Temperature(t) => sample.confidence_unchecked(*t),
            Self::BinRemap { scheme, remap } => {
                let c = sample.confidence_unchecked(1.0);
                let bin = calibration::bin_index(c, scheme).expect("softmax confidence lies in [0, 1]");
                remap[bin].unwrap_or(c)
            }
        };
        (label, conf)
    }

    /// Binned ECE of the recalibrated confidences on `data`.
    pub fn ece(&self, data: &Dataset, scheme: &BinningScheme) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        ConfidenceStats::from_pairs(
            data.samples().iter().map(|s| {
                let (label, c) = self.apply(s);
                (c, label == s.label())
            }),
            scheme,
        )?
        .ece()
    }
}

impl fmt::Display for RecalibratedModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Temperature(t) => write!(f, "temperature {t}"),
            Self::BinRemap { remap, .. } => {
                f.write_str("bin remap [")?;
                for (i, v) in remap.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    match v {
                        Some(v) => write!(f, "{v:.4}")?,
                        None => f.write_str("keep")?,
                    }
                }
                f.write_str("]")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    None,
    OneSource,
    HistBin,
    NllT,
    EceT,
    AccT,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::None,
        Method::OneSource,
        Method::HistBin,
        Method::NllT,
        Method::EceT,
        Method::AccT,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::None => "none",
            Method::OneSource => "one-source",
            Method::HistBin => "hist-bin",
            Method::NllT => "nll-t",
            Method::EceT => "ece-t",
            Method::AccT => "acc-t",
        }
    }

    /// Queries each source answers during one private run with `iterations` = K.
    pub fn query_count(self, iterations: usize) -> usize {
        match self {
            Method::None | Method::OneSource => 0,
            Method::HistBin => 1,
            Method::NllT | Method::EceT | Method::AccT => iterations + 2,
        }
    }

    /// Stable index used when deriving per-method seeds.
    pub fn tag(self) -> u64 {
        Method::ALL.iter().position(|&m| m == self).unwrap() as u64
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        Method::ALL
            .into_iter()
            .find(|m| m.name() == norm)
            .ok_or_else(|| Error::Config(format!("unknown method {s:?}")))
    }
}

/// How a temperature search splits ε over its K + 2 evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Accounting {
    /// ε/(K+1) per evaluation, i.e. Laplace scale Δf·(K+1)/ε as in the original
    /// Acc-T. The last evaluation overdraws by one share; sources record it as
    /// overdraft instead of refusing.
    PaperLiteral,
    /// ε/(K+2) per evaluation; the ledger never overdraws.
    #[default]
    WorstCase,
}

impl FromStr for Accounting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "paper" | "paper-literal" => Ok(Accounting::PaperLiteral),
            "worstcase" | "worst-case" => Ok(Accounting::WorstCase),
            other => Err(Error::Config(format!("unknown accounting {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecalConfig {
    pub method: Method,
    /// Total ε each source grants this run.
    pub epsilon: Epsilon,
    pub search: SearchConfig,
    pub scheme: BinningScheme,
    pub accounting: Accounting,
    /// Method the one-source baseline runs on its own shard.
    pub one_source_inner: Method,
    /// Noisy histogram bins with averaged mass at or below this keep original confidences.
    pub hist_min_mass: f64,
}

impl Default for RecalConfig {
    fn default() -> Self {
        Self {
            method: Method::AccT,
            epsilon: Epsilon::new(1.0).expect("positive"),
            search: SearchConfig::default(),
            scheme: BinningScheme::default(),
            accounting: Accounting::WorstCase,
            one_source_inner: Method::EceT,
            hist_min_mass: DEFAULT_HIST_MIN_MASS,
        }
    }
}

impl RecalConfig {
    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_epsilon(mut self, epsilon: Epsilon) -> Self {
        self.epsilon = epsilon;
        self
    }

    /// Per-evaluation ε share and whether sources may overdraw, for temperature methods.
    pub fn temperature_share(&self) -> (Epsilon, bool) {
        let k = self.search.iterations();
        match self.accounting {
            Accounting::WorstCase => (self.epsilon.split(k + 2), false),
            Accounting::PaperLiteral => (self.epsilon.split(k + 1), true),
        }
    }
}

pub(crate) fn sum_abs(values: &[f64]) -> f64 {
    values.iter().map(|v| v.abs()).sum()
}

/// Builds a bin remap from averaged `[n_correct; k] ++ [n_bin; k]` tallies.
///
/// Bins whose averaged mass is at or below `min_mass` (or not positive) keep original
/// confidences; the rest map to the clamped ratio.
pub fn remap_from_tallies(tallies: &[f64], scheme: &BinningScheme, min_mass: f64) -> RecalibratedModel {
    let k = scheme.bins();
    assert_eq!(tallies.len(), 2 * k, "tally vector must hold 2k entries");
    let (correct, mass) = tallies.split_at(k);
    let remap = correct
        .iter()
        .zip(mass)
        .map(|(&c, &n)| (n > min_mass.max(0.0)).then(|| (c / n).clamp(0.0, 1.0)))
        .collect();
    RecalibratedModel::BinRemap {
        scheme: *scheme,
        remap,
    }
}

fn private_temperature(
    sources: &mut [PrivateSource],
    cfg: &RecalConfig,
    kind: QueryKind,
    reduce: fn(&[f64]) -> f64,
) -> Result<RecalibratedModel> {
    if sources.is_empty() {
        return Err(Error::NoSources);
    }
    let search = cfg.search.with_direction(Direction::Minimize);
    let (share, permit_overdraft) = cfg.temperature_share();
    let mut iteration = 0;
    let out = golden_section(&search, |t| {
        let mut q = QuerySpec::new(kind, t, cfg.scheme, share);
        q.permit_overdraft = permit_overdraft;
        let responses = protocol::broadcast(sources, &q, iteration)?;
        iteration += 1;
        Ok::<_, Error>(reduce(&protocol::aggregate(&responses)?))
    })?;
    Ok(RecalibratedModel::Temperature(out.optimum))
}

/// Acc-T: temperature minimizing |mean over sources of Σ (1[correct] − confidence)|.
pub fn acc_t(sources: &mut [PrivateSource], cfg: &RecalConfig) -> Result<RecalibratedModel> {
    private_temperature(sources, cfg, QueryKind::AccConfGap, |v| v[0].abs())
}

/// NLL-T: temperature minimizing the mean of per-source clipped NLL sums.
pub fn nll_t(sources: &mut [PrivateSource], cfg: &RecalConfig) -> Result<RecalibratedModel> {
    private_temperature(sources, cfg, QueryKind::NllSum, |v| v[0])
}

/// ECE-T: temperature minimizing Σ_bins |mean over sources of (n_correct − Σ confidence)|.
///
/// With equal-width bins the objective is only roughly unimodal; the search is
/// best-effort.
pub fn ece_t(sources: &mut [PrivateSource], cfg: &RecalConfig) -> Result<RecalibratedModel> {
    private_temperature(sources, cfg, QueryKind::EceBinResiduals, sum_abs)
}

/// Histogram binning from one tally query per source spending the whole ε.
pub fn hist_bin(sources: &mut [PrivateSource], cfg: &RecalConfig) -> Result<RecalibratedModel> {
    if sources.is_empty() {
        return Err(Error::NoSources);
    }
    let q = QuerySpec::new(QueryKind::HistTallies, 1.0, cfg.scheme, cfg.epsilon);
    let tallies = protocol::aggregate(&protocol::broadcast(sources, &q, 0)?)?;
    // Without noise every populated bin's ratio is exact, so only empty bins fall back.
    let min_mass = if cfg.epsilon.is_infinite() {
        0.0
    } else {
        cfg.hist_min_mass
    };
    Ok(remap_from_tallies(&tallies, &cfg.scheme, min_mass))
}

/// Source 0 recalibrates on its own shard with `cfg.one_source_inner`, noiselessly
/// and without touching any ledger.
pub fn one_source(sources: &[PrivateSource], cfg: &RecalConfig) -> Result<RecalibratedModel> {
    let data = sources.first().ok_or(Error::NoSources)?.local_data();
    let shards = [data];
    match cfg.one_source_inner {
        Method::None => Ok(none_baseline()),
        Method::NllT => exact::nll_t(&shards, &cfg.search),
        Method::EceT => exact::ece_t(&shards, &cfg.search, &cfg.scheme),
        Method::AccT => exact::acc_t(&shards, &cfg.search),
        Method::HistBin => exact::hist_bin(&shards, &cfg.scheme),
        Method::OneSource => Err(Error::Config(
            "one-source baseline cannot nest itself".into(),
        )),
    }
}

pub fn none_baseline() -> RecalibratedModel {
    RecalibratedModel::identity()
}

/// Runs `cfg.method` against the sources.
pub fn recalibrate(sources: &mut [PrivateSource], cfg: &RecalConfig) -> Result<RecalibratedModel> {
    match cfg.method {
        Method::None => Ok(none_baseline()),
        Method::OneSource => one_source(sources, cfg),
        Method::HistBin => hist_bin(sources, cfg),
        Method::NllT => nll_t(sources, cfg),
        Method::EceT => ece_t(sources, cfg),
        Method::AccT => acc_t(sources, cfg),
    }
}

#[cfg(test)]
mod tests;
