//! Seeded random substreams.
//!
//! Every consumer of randomness gets its own ChaCha stream derived from a
//! single 64-bit seed, so turning one mechanism on or off never shifts the
//! draws seen by another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Graph = 1,
    Seeding = 2,
    Contacts = 3,
    Sampling = 4,
    Recovery = 5,
    Race = 6,
    Chain = 7,
    Noise = 8,
}

/// Independent generator for `stream` under `seed`.
pub fn substream(seed: u64, stream: Stream) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Seed for replicate `index` of a batch started from `base`.
///
/// SplitMix64 finalizer, so neighbouring replicates do not share key material.
pub fn replicate_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
