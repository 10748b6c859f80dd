use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// The generator handed to simulators.
pub type StreamRng = ChaCha8Rng;

/// Identifies one independent random stream.
///
/// The root seed keys the ChaCha generator and the stream id selects one of
/// its 2^64 non-overlapping streams, so a `(root_seed, stream_id)` pair
/// reproduces the same draws no matter which thread consumes it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub root_seed: u64,
    pub stream_id: u64,
}

impl SeedSpec {
    pub const fn new(root_seed: u64) -> Self {
        Self {
            root_seed,
            stream_id: 0,
        }
    }

    pub const fn with_stream(root_seed: u64, stream_id: u64) -> Self {
        Self {
            root_seed,
            stream_id,
        }
    }

    /// Derives a child stream keyed by `tag`. Children of distinct tags (and
    /// of distinct parents) land on unrelated stream ids.
    pub fn child(&self, tag: u64) -> Self {
        let mixed = splitmix64(self.stream_id ^ splitmix64(tag.wrapping_add(0x632b_e59b_d9b4_e019)));
        Self {
            root_seed: self.root_seed,
            stream_id: mixed,
        }
    }

    /// Shorthand for a chain of [`SeedSpec::child`] calls.
    pub fn path(&self, tags: &[u64]) -> Self {
        tags.iter().fold(*self, |s, &t| s.child(t))
    }

    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.root_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
