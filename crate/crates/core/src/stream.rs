//! Reproducible random substreams.
//!
//! A [`RandomStream`] names a ChaCha8 keystream: the key is expanded from the
//! master seed (and a lane number) with SplitMix64, and the stream index picks
//! the ChaCha stream. Both steps are fully specified integer arithmetic, so a
//! given `(master_seed, stream_index)` yields the same variates on every
//! platform, and distinct indices give non-overlapping keystreams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifies one independent random substream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RandomStream {
    pub master_seed: u64,
    pub stream_index: u64,
    lane: u32,
}

impl RandomStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
            lane: 0,
        }
    }

    /// A sibling stream with the same `(master_seed, stream_index)` but an
    /// independent key. Used to keep event sampling and success marking of
    /// one individual on separate variates.
    pub fn lane(self, lane: u32) -> Self {
        Self { lane, ..self }
    }

    pub fn lane_id(&self) -> u32 {
        self.lane
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut state = self.master_seed ^ (u64::from(self.lane)).wrapping_mul(0xD1B5_4A32_D192_ED03);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.stream_index);
        rng
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
