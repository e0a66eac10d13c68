//! Differentially private confidence recalibration over pooled private data sources.
//!
//! A *calibrator* never sees raw samples. It issues statistic queries to a set of
//! [`protocol::PrivateSource`]s, each of which answers through the Laplace mechanism
//! and charges its own ε ledger. The calibrator averages the noised answers and drives
//! a golden-section search over the softmax temperature (or, for histogram binning, a
//! single tally query) to produce a [`recalibrate::RecalibratedModel`].
//!
//! Module map:
//!
//! - [`calibration`]: noiseless confidence, accuracy, NLL and ECE statistics.
//! - [`dp`]: Laplace mechanism and per-source privacy budgets.
//! - [`protocol`]: query kinds, private sources and response aggregation.
//! - [`search`]: golden-section search over a temperature interval.
//! - [`recalibrate`]: NLL-T, ECE-T, Acc-T, histogram binning and baselines.
//! - [`harness`]: logit files, synthetic data, source splitting and trial sweeps.
//! - [`verify`]: statistical self-checks of the mechanism and objectives.

pub mod calibration;
pub mod dp;
mod error;
pub mod harness;
pub mod protocol;
pub mod recalibrate;
pub mod search;
pub mod seed;
pub mod verify;

pub use error::{Error, Result};

pub use calibration::{BinningScheme, ConfidenceStats, Dataset, LabeledLogits};
pub use dp::{Epsilon, NoiseSpec, PrivacyBudget};
pub use protocol::{PrivateSource, QueryKind, QueryResponse, QuerySpec};
pub use recalibrate::{Accounting, Method, RecalConfig, RecalibratedModel};
pub use search::{Direction, InteriorRatio, SearchConfig, SearchOutcome};
