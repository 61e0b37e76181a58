//! Named random substreams.
//!
//! Every stochastic concern (workload, adversary, policy sampling, greedy
//! search) draws from its own ChaCha stream derived from a master seed and a
//! fixed label. Changing how much one concern consumes never shifts another,
//! so two runs that differ only in, say, the adversary rate still see the
//! same task sequence.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub const WORKLOAD: &str = "workload";
pub const ADVERSARY: &str = "adversary";
pub const POLICY: &str = "policy";
pub const GREEDY: &str = "greedy";
pub const INIT: &str = "init";

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// SplitMix64 finaliser, used to spread derived seeds.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed, e.g. the environment seed of episode `index` under
/// run seed `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    mix64(seed ^ mix64(index.wrapping_add(0x5851_f42d_4c95_7f2d)))
}

/// Independent stream for `label` under `seed`.
pub fn substream(seed: u64, label: &str) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(mix64(seed));
    rng.set_stream(fnv1a64(label.as_bytes()));
    rng
}
