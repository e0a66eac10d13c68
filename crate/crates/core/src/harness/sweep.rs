use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::calibration::Dataset;
use crate::dp::Epsilon;
use crate::recalibrate::{Method, RecalConfig};
use crate::{seed, Error, Result};

use super::trial::{run_trial, TrialConfig};

pub const RESULTS_HEADER: &str = "method,factor,value,trials,ece_mean,ece_median,ece_std";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    Sources,
    Samples,
    Epsilon,
}

impl Factor {
    pub fn name(self) -> &'static str {
        match self {
            Factor::Sources => "sources",
            Factor::Samples => "samples",
            Factor::Epsilon => "epsilon",
        }
    }

    fn format_value(self, v: f64) -> String {
        match self {
            Factor::Sources | Factor::Samples => format!("{}", v as usize),
            Factor::Epsilon if v.is_infinite() => "inf".into(),
            Factor::Epsilon => format!("{v}"),
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Factor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sources" => Ok(Factor::Sources),
            "samples" => Ok(Factor::Samples),
            "epsilon" | "eps" => Ok(Factor::Epsilon),
            other => Err(Error::Config(format!("unknown factor {other:?}"))),
        }
    }
}

/// Factor grids and fixed values. `Desk` is a reduced grid; `Imagenet` and `Cifar`
/// are the full-size grids for those two benchmarks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GridPreset {
    #[default]
    Desk,
    Imagenet,
    Cifar,
}

impl GridPreset {
    pub fn grid(self, factor: Factor) -> Vec<f64> {
        let steps = |from: usize, to: usize, by: usize| (from..=to).step_by(by).map(|v| v as f64).collect();
        match (self, factor) {
            (GridPreset::Desk, Factor::Sources) => vec![10.0, 25.0, 50.0, 100.0],
            (GridPreset::Desk, Factor::Samples) => vec![10.0, 30.0, 50.0],
            (GridPreset::Desk, Factor::Epsilon) => vec![0.2, 0.5, 1.0, 2.0],
            (GridPreset::Imagenet, Factor::Sources) => steps(100, 2000, 100),
            (GridPreset::Imagenet, Factor::Samples) => steps(5, 100, 5),
            (GridPreset::Cifar, Factor::Sources) => steps(10, 250, 10),
            (GridPreset::Cifar, Factor::Samples) => steps(5, 50, 5),
            (_, Factor::Epsilon) => (1..=10).map(|i| i as f64 * 0.2).collect(),
        }
    }

    /// `(sources, samples, ε)` held fixed while `factor` varies.
    pub fn fixed(self, factor: Factor) -> (usize, usize, f64) {
        match (self, factor) {
            (GridPreset::Desk, _) => (50, 30, 1.0),
            (GridPreset::Imagenet, Factor::Sources) => (0, 10, 1.0),
            (GridPreset::Imagenet, Factor::Samples) => (100, 0, 1.0),
            (GridPreset::Imagenet, Factor::Epsilon) => (100, 50, 0.0),
            (GridPreset::Cifar, Factor::Sources) => (0, 10, 1.0),
            (GridPreset::Cifar, Factor::Samples) => (50, 0, 1.0),
            (GridPreset::Cifar, Factor::Epsilon) => (50, 30, 0.0),
        }
    }

    pub fn trials(self) -> usize {
        match self {
            GridPreset::Desk => 100,
            GridPreset::Imagenet | GridPreset::Cifar => 500,
        }
    }
}

impl FromStr for GridPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "desk" => Ok(GridPreset::Desk),
            "imagenet" => Ok(GridPreset::Imagenet),
            "cifar" => Ok(GridPreset::Cifar),
            other => Err(Error::Config(format!("unknown grid preset {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub factor: Factor,
    pub grid: Vec<f64>,
    pub trials: usize,
    pub methods: Vec<Method>,
    pub master_seed: u64,
    /// Values of the two factors not being varied (the varied one is ignored).
    pub sources: usize,
    pub samples: usize,
    pub epsilon: Epsilon,
    /// Scheme, search and accounting shared by every trial.
    pub base: RecalConfig,
}

impl SweepConfig {
    pub fn from_preset(preset: GridPreset, factor: Factor, methods: Vec<Method>, master_seed: u64) -> Self {
        let (sources, samples, eps) = preset.fixed(factor);
        Self {
            factor,
            grid: preset.grid(factor),
            trials: preset.trials(),
            methods,
            master_seed,
            sources,
            samples,
            epsilon: Epsilon::new(eps).unwrap_or(Epsilon::INFINITE),
            base: RecalConfig::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::Config("sweep grid is empty".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("sweep needs at least one trial".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("sweep needs at least one method".into()));
        }
        Ok(())
    }

    fn trial_config(&self, method: Method, value: f64) -> Result<TrialConfig> {
        let mut cfg = TrialConfig {
            recal: self.base.clone().with_method(method).with_epsilon(self.epsilon),
            sources: self.sources,
            samples: self.samples,
        };
        let as_count = |v: f64| {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::Config(format!("{} must be a positive integer, got {v}", self.factor)))
            }
        };
        match self.factor {
            Factor::Sources => cfg.sources = as_count(value)?,
            Factor::Samples => cfg.samples = as_count(value)?,
            Factor::Epsilon => cfg.recal.epsilon = Epsilon::new(value)?,
        }
        Ok(cfg)
    }
}

/// One aggregate line of the results file.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub method: Method,
    pub factor: Factor,
    pub value: f64,
    pub trials: usize,
    pub ece_mean: f64,
    pub ece_median: f64,
    pub ece_std: f64,
}

fn summarize(values: &mut [f64]) -> (f64, f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    let median = if values.len().is_multiple_of(2) {
        (values[mid - 1] + values[mid]) / 2.0
    } else {
        values[mid]
    };
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, median, std)
}

/// Runs `trials` seeded trials per (method, grid value). Trials run in parallel;
/// rows come back in method-major, grid-minor order.
pub fn run_sweep(cfg: &SweepConfig, data: &Dataset) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let mut rows = Vec::with_capacity(cfg.methods.len() * cfg.grid.len());
    for &method in &cfg.methods {
        for &value in &cfg.grid {
            let trial_cfg = cfg.trial_config(method, value)?;
            let mut eces = (0..cfg.trials)
                .into_par_iter()
                .map(|trial| {
                    let seed = seed::derive(cfg.master_seed, &[method.tag(), value.to_bits(), trial as u64]);
                    run_trial(data, &trial_cfg, seed)
                        .map(|o| o.ece_test)
                        .map_err(|e| Error::Trial {
                            context: format!(
                                "method {method}, {}={}, trial {trial}",
                                cfg.factor,
                                cfg.factor.format_value(value)
                            ),
                            source: Box::new(e),
                        })
                })
                .collect::<Result<Vec<f64>>>()?;
            let (ece_mean, ece_median, ece_std) = summarize(&mut eces);
            rows.push(SweepRow {
                method,
                factor: cfg.factor,
                value,
                trials: cfg.trials,
                ece_mean,
                ece_median,
                ece_std,
            });
        }
    }
    Ok(rows)
}

pub fn write_results<W: Write>(writer: W, rows: &[SweepRow]) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    wtr.write_record(RESULTS_HEADER.split(','))?;
    for r in rows {
        wtr.write_record([
            r.method.name().to_string(),
            r.factor.name().to_string(),
            r.factor.format_value(r.value),
            r.trials.to_string(),
            r.ece_mean.to_string(),
            r.ece_median.to_string(),
            r.ece_std.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
