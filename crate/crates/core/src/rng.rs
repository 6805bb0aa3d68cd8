//! Deterministic per-pair random streams.
//!
//! Every random draw in a run comes from a ChaCha stream keyed by the run
//! seed, selected by the pair id, and positioned by the purpose of the draw.
//! Results therefore do not depend on how pairs are chunked across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for; each purpose reads a disjoint block of the
/// pair's keystream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Arrival = 0,
    Detuning = 1,
    Grating = 2,
    Routing = 3,
    Herald = 4,
    Signal = 5,
}

const BLOCK_WORDS_LOG2: u32 = 40;

#[derive(Debug, Clone)]
pub struct Streams {
    seed: u64,
    base: ChaCha8Rng,
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            base: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn for_pair(&self, pair_id: u64, purpose: Purpose) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(pair_id);
        rng.set_word_pos((purpose as u128) << BLOCK_WORDS_LOG2);
        rng
    }

    /// Independent family of streams for a sub-run identified by `salt`.
    pub fn derive(&self, salt: u64) -> Self {
        Self::new(splitmix64(self.seed ^ splitmix64(salt)))
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
