//! Deterministic random streams for replicated experiments.
//!
//! Each replication gets its own ChaCha stream keyed by the master seed, a
//! row key (such as `m`) and the replication index, so results do not depend
//! on how replications are spread over threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator for one replication.
pub fn replication_rng(master_seed: u64, row: u64, rep: u64) -> StreamRng {
    let mut rng = StreamRng::seed_from_u64(mix(master_seed ^ mix(row)));
    rng.set_stream(rep);
    rng
}

/// Generator for single-shot commands.
pub fn seeded_rng(seed: u64) -> StreamRng {
    StreamRng::seed_from_u64(seed)
}
