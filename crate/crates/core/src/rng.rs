//! Deterministic random substreams.
//!
//! Every stochastic draw is taken from a generator keyed by
//! `(seed, step, tag, index)`, so results do not depend on evaluation order
//! or thread count.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

pub type StreamRng = Xoshiro256PlusPlus;

/// What a substream is used for. Part of the stream key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[repr(u64)]
pub enum StreamTag {
    Energy = 1,
    ParameterShift = 2,
    VqeEnergy = 3,
    VqeGradient = 4,
    ForceHistogram = 5,
    Initialization = 6,
    Test = 99,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub seed: u64,
    pub step: u64,
    pub tag: StreamTag,
    pub index: u64,
}

impl StreamKey {
    pub fn new(seed: u64, step: u64, tag: StreamTag, index: u64) -> Self {
        Self { seed, step, tag, index }
    }

    pub fn with_index(self, index: u64) -> Self {
        Self { index, ..self }
    }

    /// Key for the `j`-th sub-draw of this key, e.g. one Pauli term.
    pub fn child(self, j: u64) -> Self {
        Self { index: mix(self.index.wrapping_mul(0xD6E8_FEB8_6659_FD93) ^ j), ..self }
    }

    pub fn rng(&self) -> StreamRng {
        let mut h = mix(self.seed ^ 0x5151_7CA1_u64);
        h = mix(h ^ self.step);
        h = mix(h ^ (self.tag as u64));
        h = mix(h ^ self.index);
        StreamRng::seed_from_u64(h)
    }
}

// splitmix64 finalizer
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
