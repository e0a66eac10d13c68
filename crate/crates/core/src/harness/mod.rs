//! Experiment harness: logit files, synthetic miscalibrated data, source splitting,
//! single trials and factor sweeps.

mod io;
mod split;
mod sweep;
mod synth;
mod trial;

pub use io::{load_logits, read_logits, save_logits, write_logits};
pub use split::{split_indices, split_sources, Split};
pub use sweep::{run_sweep, write_results, Factor, GridPreset, SweepConfig, SweepRow, RESULTS_HEADER};
pub use synth::{generate_synthetic, SynthConfig};
pub use trial::{run_trial, TrialConfig, TrialOutcome};

/// Environment variable that overrides the master seed of the CLI.
pub const SEED_ENV: &str = "PRIVCAL_SEED";
