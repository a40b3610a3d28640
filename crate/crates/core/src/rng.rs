//! Seed plumbing. Every random stream in a run is a ChaCha8 stream keyed by
//! the replicate seed plus a fixed stream id, so streams never overlap and a
//! run is reproducible from its seed alone.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub const STREAM_DEMAND: u64 = 1;
pub const STREAM_COMM: u64 = 2;
pub const STREAM_RETAILER: u64 = 3;
pub const STREAM_FACTORY: u64 = 4;
pub const STREAM_EVAL_DEMAND: u64 = 5;
pub const STREAM_EVAL_COMM: u64 = 6;

pub fn stream(seed: u64, stream_id: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}
