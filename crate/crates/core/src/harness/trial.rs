use crate::calibration::Dataset;
use crate::recalibrate::{self, RecalConfig, RecalibratedModel};
use crate::Result;

use super::split::split_sources;

/// One recalibration experiment: how to split the data and which method to run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub recal: RecalConfig,
    pub sources: usize,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    /// ECE of the recalibrated model on the held-out split.
    pub ece_test: f64,
    pub model: RecalibratedModel,
    /// Per-source ε spent, in source order.
    pub epsilon_spent: Vec<f64>,
    /// Per-source ε charged beyond the total (only under paper-literal accounting).
    pub overdraft: Vec<f64>,
    /// Per-source number of answered queries.
    pub charges: Vec<usize>,
}

impl TrialOutcome {
    pub fn temperature(&self) -> Option<f64> {
        self.model.temperature()
    }

    pub fn overdrawn(&self) -> bool {
        self.overdraft.iter().any(|&o| o > 0.0)
    }
}

/// Splits under `seed`, recalibrates on the sources, and scores the test split.
///
/// The split shuffle and every source's noise stream derive from the same trial seed.
pub fn run_trial(data: &Dataset, cfg: &TrialConfig, seed: u64) -> Result<TrialOutcome> {
    let mut split = split_sources(data, cfg.sources, cfg.samples, cfg.recal.epsilon, seed)?;
    let model = recalibrate::recalibrate(&mut split.sources, &cfg.recal)?;
    let ece_test = model.ece(&split.test, &cfg.recal.scheme)?;
    Ok(TrialOutcome {
        ece_test,
        model,
        epsilon_spent: split.sources.iter().map(|s| s.budget().spent()).collect(),
        overdraft: split.sources.iter().map(|s| s.budget().overdraft()).collect(),
        charges: split.sources.iter().map(|s| s.charges()).collect(),
    })
}
