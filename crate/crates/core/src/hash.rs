//! Counter-based hashing: a stateless map from `(seed, counter)` to
//! well-mixed 64-bit words, used to realize environments lazily and to
//! derive per-replica seeds.

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
#[inline]
pub const fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hash of a `(seed, counter)` pair.
#[inline]
pub const fn hash_pair(seed: u64, counter: u64) -> u64 {
    let keyed = mix64(seed.wrapping_add(GOLDEN_GAMMA));
    mix64(keyed ^ mix64(counter.wrapping_mul(GOLDEN_GAMMA).wrapping_add(0x632b_e59b_d9b4_e019)))
}

/// Seed for sub-stream `stream` of `seed`.
#[inline]
pub const fn derive_seed(seed: u64, stream: u64) -> u64 {
    hash_pair(seed ^ 0xd1b5_4a32_d192_ed03, stream)
}

/// Maps a 64-bit word to the open interval (0, 1) using its top 52 bits.
#[inline]
pub fn unit_open(word: u64) -> f64 {
    ((word >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Uniform variate attached to lattice site `site` under `seed`.
#[inline]
pub fn site_uniform(seed: u64, site: i64) -> f64 {
    unit_open(hash_pair(seed, site as u64))
}
