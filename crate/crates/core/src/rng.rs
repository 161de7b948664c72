//! Seeded, splittable random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Identifies one reproducible random stream.
///
/// Two `RngSeed`s with the same `seed` but different `stream_id` produce
/// independent sequences; identical pairs always produce identical sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngSeed {
    pub const fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Same seed, different stream.
    pub const fn with_stream(self, stream_id: u64) -> Self {
        Self { seed: self.seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

impl Default for RngSeed {
    fn default() -> Self {
        Self::new(crate::DEFAULT_SEED, 0)
    }
}
