//! Deterministic random-number substreams.
//!
//! Monte Carlo results must not depend on evaluation order or thread
//! schedule, so nothing here hands out a shared sequential generator.
//! Instead a single master seed fans out into independent streams addressed
//! by a small integer path (purpose, trial, user, cluster). Requesting the
//! same path always yields the same stream, no matter what was drawn before
//! or on which worker.
//!
//! Derivation: the master seed and the path words are absorbed through a
//! splitmix64 chain into a 256-bit ChaCha key. Distinct paths get
//! statistically unrelated keys.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Purpose words that keep unrelated draws on disjoint stream paths.
pub mod purpose {
    /// Per-trial user placement draws.
    pub const PLACEMENT: u64 = 1;
    /// Small-scale fading coefficients, one stream per (trial, user, cluster).
    pub const SMALL_SCALE: u64 = 2;
    /// Receiver noise, one stream per trial.
    pub const NOISE: u64 = 3;
    /// Cluster visibility masks, one stream per (trial, user, cluster).
    pub const VISIBILITY: u64 = 4;
    /// Cluster arrival directions, one stream per (trial, user, cluster).
    pub const CLUSTER_DIRECTION: u64 = 5;
}

/// Addressable fan-out of one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Substreams {
    master: u64,
}

impl Substreams {
    pub fn new(master_seed: u64) -> Self {
        Self { master: master_seed }
    }

    pub fn master_seed(&self) -> u64 {
        self.master
    }

    /// The stream addressed by `[purpose, trial, user, cluster]`. Unused
    /// trailing coordinates are zero by convention.
    pub fn rng(&self, path: [u64; 4]) -> ChaCha12Rng {
        let mut acc = mix(self.master ^ 0x243f_6a88_85a3_08d3);
        for (i, word) in path.iter().enumerate() {
            acc = mix(acc ^ mix(word.wrapping_add(mix(i as u64 + 1))));
        }
        let mut key = [0u8; 32];
        let mut state = acc;
        for chunk in key.chunks_exact_mut(8) {
            state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
            chunk.copy_from_slice(&mix(state).to_le_bytes());
        }
        ChaCha12Rng::from_seed(key)
    }
}

/// splitmix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
