//! Seeded random streams.
//!
//! All randomness flows from a single `u64` master seed. Child seeds are
//! derived with [`derive_seed`], a SplitMix64 finalizer applied to the parent
//! seed and a tag, so replication `d` of an experiment uses
//! `derive_seed(master, d)` no matter which other replications run or in
//! which order. Generators are ChaCha8, which produces the same stream on
//! every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Tags for the independent sub-streams used inside one replication.
pub mod tag {
    pub const TRAIN_DATA: u64 = 0x7472_6169_6e00;
    pub const TEST_DATA: u64 = 0x7465_7374_0000;
    pub const SPLIT: u64 = 0x7370_6c69_7400;
    pub const FOLDS: u64 = 0x666f_6c64_7300;
    pub const BAGGING: u64 = 0x6261_6700_0000;
    pub const BOOSTING: u64 = 0x6164_6100_0000;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(parent: u64, tag: u64) -> u64 {
    splitmix64(parent ^ splitmix64(tag))
}

pub fn rng_from_seed(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}
