//! Counter-based random streams.
//!
//! A stream is a ChaCha8 key derived from `(seed, stream_id)`; the ChaCha
//! stream word selects an independent block sequence per work item. Work
//! items (sample chunks, frames) are indexed, so results never depend on
//! how items are scheduled across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Seed used when neither the caller nor `VDLAB_SEED` provides one.
pub const DEFAULT_SEED: u64 = 0x5eed_2016_0b0d_1e5;

/// Environment variable overriding [`DEFAULT_SEED`].
pub const SEED_ENV: &str = "VDLAB_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Stream seeded from `VDLAB_SEED` when set and parseable, else [`DEFAULT_SEED`].
    pub fn from_env() -> Self {
        Self::new(default_seed(), 0)
    }

    /// Deterministic child stream; distinct tags give independent keys.
    pub fn child(&self, tag: u64) -> Self {
        let id = splitmix(self.stream_id ^ splitmix(tag.wrapping_add(0x632b_e59b_d9b4_e019)));
        Self { seed: self.seed, stream_id: id }
    }

    /// Generator for work item `index` of this stream.
    pub fn item_rng(&self, index: u64) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.stream_id.to_le_bytes());
        key[16..24].copy_from_slice(&splitmix(self.seed).to_le_bytes());
        key[24..].copy_from_slice(&splitmix(self.stream_id ^ 0xa5a5_a5a5).to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(index);
        rng
    }
}

/// Global default seed, honoring `VDLAB_SEED`.
pub fn default_seed() -> u64 {
    std::env::var(SEED_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_SEED)
}
