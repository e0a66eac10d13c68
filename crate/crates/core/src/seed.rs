//! Deterministic seed derivation.
//!
//! Child seeds are a SplitMix64 fold of a parent seed and a list of integer tags,
//! so the same `(parent, tags)` always yields the same stream on every platform.

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed derived from `parent` and an ordered list of tags.
pub fn derive(parent: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(mix(parent.wrapping_add(GAMMA)), |acc, &tag| {
        mix(acc.wrapping_add(GAMMA) ^ mix(tag.wrapping_add(GAMMA.wrapping_mul(2))))
    })
}
