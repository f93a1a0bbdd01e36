//! Deterministic random substreams.
//!
//! Every stochastic consumer gets its own ChaCha8 stream seeded from
//! `(master seed, index, purpose)`, so runs can execute in any order or in
//! parallel and still reproduce bit for bit. Changing the stream for one
//! purpose leaves every other purpose untouched.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// What a substream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    /// Target process noise.
    Truth,
    /// Detection, measurement noise and clutter.
    Measurements,
    /// Initial track estimate draw.
    Prior,
    /// Monte Carlo samples of the bound integrals.
    BoundSamples,
    /// Random control policy.
    Policy,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Truth => 0x7472_7574_6800_0001,
            Purpose::Measurements => 0x6d65_6173_0000_0002,
            Purpose::Prior => 0x7072_696f_7200_0003,
            Purpose::BoundSamples => 0x626f_756e_6400_0004,
            Purpose::Policy => 0x706f_6c69_6379_0005,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// 64-bit key for `(master, index, purpose)`.
pub fn substream_key(master: u64, index: u64, purpose: Purpose) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ index) ^ purpose.tag())
}

pub fn substream(master: u64, index: u64, purpose: Purpose) -> SimRng {
    SimRng::seed_from_u64(substream_key(master, index, purpose))
}
