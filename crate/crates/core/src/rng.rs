//! Seeded random streams.
//!
//! Every random object in the crate draws from its own ChaCha8 stream keyed
//! by `seed ^ role`. ChaCha output is fully determined by key and counter,
//! so a `(seed, role)` pair yields the same bits on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Role tags mixed into seeds so that independent objects never share a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Role {
    Phi = 0x5048_4900_0000_0001,
    Psi = 0x5053_4900_0000_0002,
    LeftAffine = 0x5341_4646_0000_0003,
    RightAffine = 0x5441_4646_0000_0004,
    Omega = 0x4f4d_4547_0000_0005,
    Noise1 = 0x4e4f_4931_0000_0006,
    Noise2 = 0x4e4f_4932_0000_0007,
    Data = 0x4441_5441_0000_0008,
    Order = 0x4f52_4445_0000_0009,
    Audit = 0x4155_4449_0000_000a,
    InnerSketch = 0x494e_4e52_0000_000b,
    OuterSketch = 0x4f55_5452_0000_000c,
    Hash = 0x4841_5348_0000_000d,
    Signs = 0x5349_474e_0000_000e,
    Rows = 0x524f_5753_0000_000f,
}

impl Role {
    pub fn tag(self) -> u64 {
        self as u64
    }
}

/// Seed for the stream that plays `role` under the base `seed`.
pub fn derive(seed: u64, role: Role) -> u64 {
    seed ^ role.tag()
}

pub fn stream(seed: u64, role: Role) -> StreamRng {
    StreamRng::seed_from_u64(derive(seed, role))
}

/// Splits a base seed into the `index`-th child (SplitMix64 finalizer), used
/// for per-trial and per-row seeds.
pub fn split(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
