//! Reproducible random streams.
//!
//! Every replication draws from its own ChaCha8 stream. The stream for
//! replication `i` under master seed `s` is `ChaCha8Rng::seed_from_u64(s)`
//! with its 64-bit stream id set to `i`; ChaCha is counter based, so streams
//! are disjoint and the result of replication `i` does not depend on which
//! thread runs it or in what order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream id reserved for bootstrap resampling, never used by a replication.
pub const BOOTSTRAP_STREAM: u64 = u64::MAX;

pub fn stream(master_seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Inverse-CDF exponential variate with the given rate: `-ln(1 - U) / rate`.
pub fn exponential<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    let u: f64 = rng.random();
    -(-u).ln_1p() / rate
}
