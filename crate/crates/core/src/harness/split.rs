use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::calibration::Dataset;
use crate::dp::Epsilon;
use crate::protocol::PrivateSource;
use crate::{seed, Error, Result};

const SHUFFLE_TAG: u64 = 0x5348_5546;
const NOISE_TAG: u64 = 0x4E4F_4953;

/// Equal-size private shards plus the held-out test split.
#[derive(Debug)]
pub struct Split {
    pub sources: Vec<PrivateSource>,
    pub test: Dataset,
}

/// Shuffles `0..len` under `seed`; the first `n_sources·n_samples` indices form
/// consecutive shards, the rest the test split.
pub fn split_indices(
    len: usize,
    n_sources: usize,
    n_samples: usize,
    seed: u64,
) -> Result<(Vec<Vec<usize>>, Vec<usize>)> {
    if n_sources == 0 || n_samples == 0 {
        return Err(Error::Config("sources and samples per source must be positive".into()));
    }
    let needed = n_sources
        .checked_mul(n_samples)
        .ok_or_else(|| Error::Config("source count overflow".into()))?;
    if needed >= len {
        return Err(Error::InsufficientData {
            needed,
            available: len,
        });
    }
    let mut order: Vec<usize> = (0..len).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed::derive(seed, &[SHUFFLE_TAG])));
    let test = order.split_off(needed);
    let shards = order.chunks(n_samples).map(<[usize]>::to_vec).collect();
    Ok((shards, test))
}

/// Splits `data` into `n_sources` private sources of `n_samples` each, every one
/// holding ε = `epsilon` and a noise RNG derived from `seed`.
pub fn split_sources(
    data: &Dataset,
    n_sources: usize,
    n_samples: usize,
    epsilon: Epsilon,
    seed: u64,
) -> Result<Split> {
    let (shards, test) = split_indices(data.len(), n_sources, n_samples, seed)?;
    let sources = shards
        .iter()
        .enumerate()
        .map(|(id, idx)| {
            PrivateSource::new(
                id,
                data.select(idx),
                epsilon,
                seed::derive(seed, &[NOISE_TAG, id as u64]),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Split {
        sources,
        test: data.select(&test),
    })
}
