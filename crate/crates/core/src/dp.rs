//! Laplace mechanism and per-source ε ledgers.
//!
//! Noiseless operation is modeled as an infinite ε rather than a separate code path:
//! an infinite share yields a zero Laplace scale, and a zero scale passes values
//! through untouched without advancing the RNG.

use std::fmt;
use std::str::FromStr;

use rand::distr::Open01;
use rand::Rng;

use crate::{Error, Result};

/// Relative slack absorbed by the ledger when shares like ε/7 do not sum back to ε
/// exactly in floating point.
const LEDGER_ROUNDING: f64 = 1e-9;

/// A privacy parameter ε > 0, possibly infinite (no noise).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Epsilon(f64);

impl Epsilon {
    pub const INFINITE: Epsilon = Epsilon(f64::INFINITY);

    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 {
            Ok(Self(value))
        } else {
            Err(Error::InvalidEpsilon(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// ε / parts, the share granted to each of `parts` sequentially composed queries.
    pub fn split(self, parts: usize) -> Self {
        assert!(parts > 0, "cannot split a budget into zero parts");
        Self(self.0 / parts as f64)
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl FromStr for Epsilon {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "infinite" => Ok(Self::INFINITE),
            other => {
                let v: f64 = other
                    .parse()
                    .map_err(|_| Error::Config(format!("cannot parse epsilon {s:?}")))?;
                Self::new(v)
            }
        }
    }
}

/// Running ε ledger of one private source.
///
/// `spent` never exceeds `total`. Charges made through
/// [`charge_permitting_overdraft`](Self::charge_permitting_overdraft) record the
/// excess separately in `overdraft` instead of failing.
#[derive(Debug, Clone, PartialEq)]
pub struct PrivacyBudget {
    total: Epsilon,
    spent: f64,
    overdraft: f64,
}

impl PrivacyBudget {
    pub fn new(total: Epsilon) -> Self {
        Self {
            total,
            spent: 0.0,
            overdraft: 0.0,
        }
    }

    pub fn total(&self) -> Epsilon {
        self.total
    }

    pub fn spent(&self) -> f64 {
        self.spent
    }

    pub fn overdraft(&self) -> f64 {
        self.overdraft
    }

    pub fn remaining(&self) -> f64 {
        self.total.value() - self.spent
    }

    fn fits(&self, share: f64) -> bool {
        let total = self.total.value();
        self.spent + share <= total * (1.0 + LEDGER_ROUNDING)
    }

    fn commit(&mut self, share: f64) {
        self.spent = (self.spent + share).min(self.total.value());
    }

    /// Spends `share`, failing with [`Error::BudgetExhausted`] if it would overdraw.
    pub fn charge(&mut self, share: Epsilon) -> Result<()> {
        let share = share.value();
        if !self.fits(share) {
            return Err(Error::BudgetExhausted {
                source_id: None,
                spent: self.spent,
                requested: share,
                total: self.total.value(),
            });
        }
        self.commit(share);
        Ok(())
    }

    /// Spends `share`; any part beyond the total lands in `overdraft`. Returns the
    /// newly overdrawn amount.
    pub fn charge_permitting_overdraft(&mut self, share: Epsilon) -> f64 {
        let share = share.value();
        if self.fits(share) {
            self.commit(share);
            0.0
        } else {
            let excess = self.spent + share - self.total.value();
            self.spent = self.total.value();
            self.overdraft += excess;
            excess
        }
    }
}

/// L1 sensitivity of a query vector and the ε share spent answering it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    sensitivity: f64,
    epsilon_share: Epsilon,
}

impl NoiseSpec {
    pub fn new(sensitivity: f64, epsilon_share: Epsilon) -> Result<Self> {
        if !(sensitivity >= 0.0 && sensitivity.is_finite()) {
            return Err(Error::InvalidSensitivity(sensitivity));
        }
        Ok(Self {
            sensitivity,
            epsilon_share,
        })
    }

    pub fn sensitivity(&self) -> f64 {
        self.sensitivity
    }

    pub fn epsilon_share(&self) -> Epsilon {
        self.epsilon_share
    }

    /// Laplace scale Δf/ε; zero for an infinite share.
    pub fn scale(&self) -> f64 {
        if self.epsilon_share.is_infinite() {
            0.0
        } else {
            self.sensitivity / self.epsilon_share.value()
        }
    }
}

/// One Laplace(0, scale) draw by inverting the CDF at a uniform point in (−½, ½).
pub fn laplace_sample<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> Result<f64> {
    if scale.is_nan() || scale < 0.0 {
        return Err(Error::NegativeScale(scale));
    }
    if scale == 0.0 {
        return Ok(0.0);
    }
    let u: f64 = rng.sample::<f64, _>(Open01) - 0.5;
    Ok(-scale * u.signum() * (-2.0 * u.abs()).ln_1p())
}

/// Adds independent Laplace noise at `spec.scale()` to every coordinate.
pub fn mechanize<R: Rng + ?Sized>(values: &[f64], spec: &NoiseSpec, rng: &mut R) -> Vec<f64> {
    let scale = spec.scale();
    if scale == 0.0 {
        return values.to_vec();
    }
    values
        .iter()
        .map(|&v| v + laplace_sample(scale, rng).expect("scale validated non-negative"))
        .collect()
}
