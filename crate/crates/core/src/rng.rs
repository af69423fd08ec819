//! Reproducible random substreams.
//!
//! All randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`). A
//! [`RandomStreams`] is a 64-bit seed; its key is expanded with
//! `SeedableRng::seed_from_u64`, and substream `i` is that key with the
//! ChaCha stream id set to `i`. Each bootstrap or Monte-Carlo iteration
//! reads only its own substream, so results do not depend on the order in
//! which iterations run.
//!
//! Nested experiments (a simulation cell whose iterations run their own
//! bootstraps) use [`RandomStreams::child`], which seeds a fresh family from
//! the first word of the parent's substream.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomStreams {
    seed: u64,
}

impl RandomStreams {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self, index: u64) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }

    pub fn child(&self, index: u64) -> RandomStreams {
        RandomStreams::new(self.stream(index).next_u64())
    }
}
