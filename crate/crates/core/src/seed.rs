//! Named random streams derived from one 64-bit seed.
//!
//! Every randomized choice (fold shuffles, labelset partitions, Monte-Carlo
//! samples, random label orders) draws from a stream keyed by a component
//! name plus indices, so the order in which work is scheduled never changes
//! a result.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A key component of a stream name.
#[derive(Debug, Clone, Copy)]
pub enum Part<'a> {
    Str(&'a str),
    Int(u64),
}

impl<'a> From<&'a str> for Part<'a> {
    fn from(s: &'a str) -> Self {
        Part::Str(s)
    }
}

impl From<u64> for Part<'_> {
    fn from(v: u64) -> Self {
        Part::Int(v)
    }
}

impl From<usize> for Part<'_> {
    fn from(v: usize) -> Self {
        Part::Int(v as u64)
    }
}

/// Derives a child seed from `seed` and a path of named parts.
pub fn derive(seed: u64, parts: &[Part<'_>]) -> u64 {
    let mut h = FNV_OFFSET ^ splitmix(seed);
    for part in parts {
        // tag byte keeps ("ab", "c") distinct from ("a", "bc")
        let (tag, bytes): (u8, &[u8]) = match part {
            Part::Str(s) => (1, s.as_bytes()),
            Part::Int(_) => (2, &[]),
        };
        h ^= tag as u64;
        h = h.wrapping_mul(FNV_PRIME);
        for &b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(FNV_PRIME);
        }
        if let Part::Int(v) = part {
            for b in v.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(FNV_PRIME);
            }
        }
        h ^= 0xff;
        h = h.wrapping_mul(FNV_PRIME);
    }
    splitmix(h)
}

pub fn rng(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shorthand for `rng(derive(seed, parts))`.
pub fn stream(seed: u64, parts: &[Part<'_>]) -> StreamRng {
    rng(derive(seed, parts))
}
