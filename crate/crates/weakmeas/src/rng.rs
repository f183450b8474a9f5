//! Deterministic random-number plumbing.
//!
//! Every stochastic quantity in the crate draws from a ChaCha8 generator addressed by
//! `(seed, stream)`. Record `j` of an ensemble owns two streams: `2j` for the detector
//! background noise and `2j + 1` for any process randomness (oracle phase kicks, telegraph
//! flips). Separate streams keep the noise realization invariant when the process model
//! changes, and make ensembles independent of evaluation order and thread count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for stream `stream` of the family identified by `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// The pair of generators owned by ensemble record `index`.
#[derive(Debug)]
pub struct RecordStreams {
    /// Detector background noise.
    pub noise: ChaCha8Rng,
    /// Oracle/process randomness (initial phase, diffusion kicks, telegraph flips).
    pub process: ChaCha8Rng,
}

impl RecordStreams {
    pub fn new(seed: u64, index: u64) -> Self {
        Self {
            noise: stream_rng(seed, 2 * index),
            process: stream_rng(seed, 2 * index + 1),
        }
    }
}
