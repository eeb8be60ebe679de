//! Seeded random streams.
//!
//! Every random quantity in the crate is a pure function of a 64-bit seed.
//! Releases use ChaCha20 with one stream per purpose, so the partition
//! shuffle and the Laplace draw never share counter positions. Simulations
//! use ChaCha8 and split their draws into fixed-size chunks, each on its own
//! stream, which keeps results identical regardless of how many threads
//! rayon schedules.

use rand::SeedableRng;
use rand_chacha::{ChaCha20Rng, ChaCha8Rng};

/// Draws per simulation chunk.
pub const CHUNK: usize = 8192;

/// Stream reserved for the random partition of a release.
pub const PARTITION_STREAM: u64 = 0;
/// Stream reserved for the Laplace draw of a release.
pub const NOISE_STREAM: u64 = 1;

pub fn release_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent seed and a path of labels.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(seed), |acc, &part| {
        splitmix64(acc ^ splitmix64(part))
    })
}

/// Fresh seed from OS entropy, for callers that did not pin one.
pub fn entropy_seed() -> u64 {
    rand::random()
}
