//! Deterministic random streams.
//!
//! A replication stream is `ChaCha8Rng::seed_from_u64(key)` where
//! `key = splitmix64(splitmix64(splitmix64(seed) ^ sweep) ^ replication)`.
//! Both steps are pure integer arithmetic, so the streams are identical on
//! every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// One step of the SplitMix64 output function.
pub const fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub const fn stream_key(seed: u64, sweep: u64, replication: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ sweep) ^ replication)
}

pub fn replication_stream(seed: u64, sweep: u64, replication: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(stream_key(seed, sweep, replication))
}
