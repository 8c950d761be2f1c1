//! Reproducible, order-independent random streams.
//!
//! Every random draw in the toolkit comes from a [`RngStream`] identified by a
//! master seed plus a path of integer tags (purpose, surrogate index, neuron,
//! trial, ...). The path is hashed into a ChaCha key, so a stream's output
//! depends only on its identity and never on which worker consumes it or when.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

/// Tags separating the independent uses of a master seed.
pub mod purpose {
    pub const DATA: u64 = 1;
    pub const SURROGATE: u64 = 2;
    pub const INJECTION: u64 = 3;
    pub const BURST: u64 = 4;
    pub const DONOR: u64 = 5;
    pub const REPLICATE: u64 = 6;
    pub const SOLVER: u64 = 7;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    seed: u64,
    key: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream { seed, key: splitmix64(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Child stream for `tag`. Children with different tags are independent.
    #[must_use]
    pub fn derive(&self, tag: u64) -> Self {
        let key = splitmix64(self.key ^ splitmix64(tag.wrapping_add(0xA076_1D64_78BD_642F)));
        RngStream { seed: self.seed, key }
    }

    /// Child stream for a path of tags.
    #[must_use]
    pub fn derive_path(&self, tags: &[u64]) -> Self {
        tags.iter().fold(*self, |s, &t| s.derive(t))
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha12Rng {
        let mut key = [0u8; 32];
        let mut state = self.key;
        for chunk in key.chunks_exact_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        ChaCha12Rng::from_seed(key)
    }
}
