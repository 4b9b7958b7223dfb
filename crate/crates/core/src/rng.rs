//! Seed derivation for reproducible, scheduling-independent ensembles.
//!
//! Every episode seed is a pure function of `(base_seed, episode_index)`, and
//! every random stream inside an episode is a pure function of the episode
//! seed and a fixed stream tag. Nothing depends on thread count or completion
//! order.
//!
//! ```text
//! mix(z)            = SplitMix64 finalizer of z + 0x9E3779B97F4A7C15
//! episode_seed(b,i) = mix(mix(b) ^ i)
//! stream(s, tag)    = ChaCha8(seed_from_u64(mix(s ^ tag)))
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Stream tag for hourly weather-driven failure sampling.
pub const FAILURE_STREAM: u64 = 0x6661_696c_7572_6573; // "failures"
/// Stream tag for repair-duration draws.
pub const REPAIR_STREAM: u64 = 0x7265_7061_6972_7321; // "repairs!"
/// Stream tag for flood radius increments and recessions.
pub const FLOOD_STREAM: u64 = 0x666c_6f6f_6469_6e67; // "flooding"
/// Stream tag for random repair ordering.
pub const DISPATCH_STREAM: u64 = 0x6469_7370_6174_6368; // "dispatch"
/// Tag used to derive the hidden episode behind a generated observed series.
pub const OBSERVED_TAG: u64 = 0x6f62_7365_7276_6564; // "observed"

/// SplitMix64 avalanche step.
#[inline]
pub fn mix(z: u64) -> u64 {
    let mut z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of episode `index` within an ensemble started from `base_seed`.
pub fn episode_seed(base_seed: u64, index: u64) -> u64 {
    mix(mix(base_seed) ^ index)
}

/// Independent generator for one purpose inside an episode.
pub fn stream(seed: u64, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed ^ tag))
}
