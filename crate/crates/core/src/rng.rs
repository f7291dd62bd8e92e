//! Seeded random streams.
//!
//! Every random draw in a run comes from a stream derived from the master
//! seed plus a purpose tag, a task stream id and an iteration index, so that
//! reordering work between tasks never changes what any task sees.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// What a stream is used for. The discriminant is mixed into the seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    PolicyInit = 1,
    ValueInit = 2,
    Rollout = 3,
    PolicyUpdate = 4,
    ValueUpdate = 5,
    RandomMask = 6,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub fn stream_seed(master: u64, purpose: Purpose, stream: u64, iteration: u64) -> u64 {
    let mut h = splitmix64(master);
    for part in [purpose as u64, stream, iteration] {
        h = splitmix64(h ^ part);
    }
    h
}

pub fn stream(master: u64, purpose: Purpose, stream: u64, iteration: u64) -> StreamRng {
    StreamRng::seed_from_u64(stream_seed(master, purpose, stream, iteration))
}
