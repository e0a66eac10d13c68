//! Non-private recalibration on shards the caller can read directly.
//!
//! These run the same objectives as the private methods without queries, ledgers or
//! noise. Per-shard statistics are averaged with the same arithmetic as
//! [`crate::protocol::aggregate`], so an infinite-ε private run reproduces them bit
//! for bit.

use crate::calibration::{self, BinningScheme, Dataset, DEFAULT_NLL_CLIP};
use crate::search::{golden_section, Direction, SearchConfig};
use crate::{Error, Result};

use super::{remap_from_tallies, sum_abs, RecalibratedModel};

fn shard_mean<F>(shards: &[&Dataset], mut stat: F) -> Result<Vec<f64>>
where
    F: FnMut(&Dataset) -> Result<Vec<f64>>,
{
    let mut iter = shards.iter();
    let first = stat(iter.next().ok_or(Error::NoSources)?)?;
    let mut sum = vec![0.0; first.len()];
    for (acc, v) in sum.iter_mut().zip(&first) {
        *acc += v;
    }
    for shard in iter {
        let v = stat(shard)?;
        if v.len() != sum.len() {
            return Err(Error::ResponseMismatch {
                expected: sum.len(),
                found: v.len(),
            });
        }
        for (acc, x) in sum.iter_mut().zip(&v) {
            *acc += x;
        }
    }
    let d = shards.len() as f64;
    Ok(sum.into_iter().map(|s| s / d).collect())
}

fn temperature_search<F>(search: &SearchConfig, mut objective: F) -> Result<RecalibratedModel>
where
    F: FnMut(f64) -> Result<f64>,
{
    let search = search.with_direction(Direction::Minimize);
    let out = golden_section(&search, &mut objective)?;
    Ok(RecalibratedModel::Temperature(out.optimum))
}

/// Temperature minimizing the mean per-shard clipped NLL sum.
pub fn nll_t(shards: &[&Dataset], search: &SearchConfig) -> Result<RecalibratedModel> {
    temperature_search(search, |t| {
        Ok(shard_mean(shards, |d| Ok(vec![calibration::nll_sum(d, t, DEFAULT_NLL_CLIP)?]))?[0])
    })
}

/// Temperature minimizing Σ_bins |mean per-shard (n_correct − Σ confidence)|.
pub fn ece_t(
    shards: &[&Dataset],
    search: &SearchConfig,
    scheme: &BinningScheme,
) -> Result<RecalibratedModel> {
    temperature_search(search, |t| {
        Ok(sum_abs(&shard_mean(shards, |d| {
            Ok(calibration::confidence_stats(d, t, scheme)?.residuals())
        })?))
    })
}

/// Temperature minimizing |mean per-shard Σ (1[correct] − confidence)|.
pub fn acc_t(shards: &[&Dataset], search: &SearchConfig) -> Result<RecalibratedModel> {
    temperature_search(search, |t| {
        Ok(shard_mean(shards, |d| Ok(vec![calibration::consistency_gap_sum(d, t)?]))?[0].abs())
    })
}

/// Per-bin remap to mean correct count over mean bin count; unpopulated bins keep
/// their original confidences.
pub fn hist_bin(shards: &[&Dataset], scheme: &BinningScheme) -> Result<RecalibratedModel> {
    let tallies = shard_mean(shards, |d| {
        let stats = calibration::confidence_stats(d, 1.0, scheme)?;
        Ok(stats
            .n_correct
            .iter()
            .chain(&stats.n_bin)
            .map(|&c| c as f64)
            .collect())
    })?;
    Ok(remap_from_tallies(&tallies, scheme, 0.0))
}
