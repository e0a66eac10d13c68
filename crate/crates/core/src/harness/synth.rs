use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::calibration::{self, Dataset, LabeledLogits};
use crate::{Error, Result};

/// Logit-scaling model of a miscalibrated classifier.
///
/// True logits are i.i.d. Normal(0, spread²); labels are drawn from their softmax;
/// the stored logits are the true ones multiplied by `miscalibration`. Dividing by
/// T = `miscalibration` restores the label-generating distribution, so that is the
/// recovery temperature. Values above 1 make the model overconfident.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub classes: usize,
    pub samples: usize,
    pub logit_spread: f64,
    pub miscalibration: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            classes: 10,
            samples: 60_000,
            logit_spread: 3.0,
            miscalibration: 2.0,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.classes < 2 {
            return Err(Error::TooFewClasses(self.classes));
        }
        if self.samples == 0 {
            return Err(Error::Config("synthetic dataset needs at least one sample".into()));
        }
        if !(self.logit_spread > 0.0 && self.logit_spread.is_finite()) {
            return Err(Error::Config(format!(
                "logit spread must be positive, got {}",
                self.logit_spread
            )));
        }
        if !(self.miscalibration > 0.0 && self.miscalibration.is_finite()) {
            return Err(Error::Config(format!(
                "miscalibration scale must be positive, got {}",
                self.miscalibration
            )));
        }
        Ok(())
    }
}

pub fn generate_synthetic(cfg: &SynthConfig) -> Result<Dataset> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let normal = Normal::new(0.0, cfg.logit_spread)
        .map_err(|e| Error::Config(format!("logit spread: {e}")))?;
    let mut samples = Vec::with_capacity(cfg.samples);
    for _ in 0..cfg.samples {
        let truth: Vec<f64> = (0..cfg.classes).map(|_| normal.sample(&mut rng)).collect();
        let probs = calibration::softmax(&LabeledLogits::new(truth.clone(), 0)?, 1.0)?;
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut label = cfg.classes - 1;
        for (i, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                label = i;
                break;
            }
        }
        let observed = truth.iter().map(|l| l * cfg.miscalibration).collect();
        samples.push(LabeledLogits::new(observed, label)?);
    }
    Dataset::new(samples)
}
