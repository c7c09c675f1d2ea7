//! Counter-based random streams keyed by `(seed, index, tag)`.
//!
//! Every random draw in the crate flows through [`stream`], so a trial's
//! randomness depends only on its key and never on execution order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Purpose tags separating independent streams under one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Tag {
    Graph = 1,
    ErrorX = 2,
    ErrorZ = 3,
    Probe = 4,
    Percolation = 5,
    Branching = 6,
    Pilot = 7,
    Audit = 8,
    Generic = 9,
}

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent generator for `(seed, index, tag)`.
///
/// The key is derived from `seed` and `tag`; `index` selects the ChaCha
/// stream, so distinct indices never overlap.
pub fn stream(seed: u64, index: u64, tag: Tag) -> StreamRng {
    let mut state = seed ^ (tag as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93);
    let mut key = [0u8; 32];
    for chunk in key.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// Mixes a list of words into one 64-bit sub-seed.
pub fn mix(parts: &[u64]) -> u64 {
    let mut state = 0x243F_6A88_85A3_08D3u64;
    for &p in parts {
        state ^= p;
        splitmix64(&mut state);
    }
    splitmix64(&mut state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let draw = |mut r: StreamRng| -> Vec<u64> { (0..4).map(|_| r.gen()).collect() };
        let a = draw(stream(7, 3, Tag::ErrorX));
        let b = draw(stream(7, 3, Tag::ErrorX));
        assert_eq!(a, b);
        let mut c = stream(7, 4, Tag::ErrorX);
        let mut d = stream(7, 3, Tag::ErrorZ);
        assert_ne!(a[0], c.gen::<u64>());
        assert_ne!(a[0], d.gen::<u64>());
    }
}
