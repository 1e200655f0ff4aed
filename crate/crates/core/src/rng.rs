//! Seeded random streams.
//!
//! Every random consumer gets its own ChaCha stream keyed by
//! `(seed, domain, index)`, so results do not depend on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) const DOMAIN_WALK: u64 = 1;
pub(crate) const DOMAIN_METAPATH: u64 = 2;
pub(crate) const DOMAIN_INIT: u64 = 3;
pub(crate) const DOMAIN_SHUFFLE: u64 = 4;
pub(crate) const DOMAIN_NEGATIVE: u64 = 5;
pub(crate) const DOMAIN_GUMBEL: u64 = 6;
pub(crate) const DOMAIN_WARMUP: u64 = 7;
pub(crate) const DOMAIN_SPLIT: u64 = 8;
pub(crate) const DOMAIN_SYNTH: u64 = 9;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub(crate) fn stream(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(domain)));
    rng.set_stream(index);
    rng
}
