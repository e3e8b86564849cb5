//! Named random-number streams derived from a single master seed.
//!
//! Each consumer (environment init, action sampling, minibatch shuffling,
//! parameter init, ...) gets its own stream keyed by name, so adding a new
//! consumer never perturbs the draws seen by existing ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Standard stream names used by the training harness.
pub const STREAM_ENV_INIT: &str = "env-init";
pub const STREAM_ACTION_SAMPLING: &str = "action-sampling";
pub const STREAM_MINIBATCH_SHUFFLE: &str = "minibatch-shuffle";
pub const STREAM_PARAM_INIT: &str = "param-init";

/// FNV-1a over the stream name, folded with the master seed and finalized
/// with the splitmix64 mixer.
pub fn stream_seed(master_seed: u64, name: &str) -> u64 {
    const FNV_OFFSET: u64 = 0xcbf29ce484222325;
    const FNV_PRIME: u64 = 0x100000001b3;
    let mut hash = FNV_OFFSET;
    for byte in name.as_bytes() {
        hash ^= *byte as u64;
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    splitmix64_mix(master_seed ^ hash)
}

/// A generator for the named stream of `master_seed`.
pub fn stream_rng(master_seed: u64, name: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(master_seed, name))
}

fn splitmix64_mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}
