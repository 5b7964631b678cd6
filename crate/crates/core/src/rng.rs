//! Deterministic seeding.
//!
//! Per-clip random streams are ChaCha8 (`rand_chacha` 0.9) keyed from a
//! 64-bit digest of `(seed, clip_id)`:
//!
//! 1. `h = FNV-1a-64(seed as 8 little-endian bytes ++ clip_id UTF-8 bytes)`
//! 2. the 32-byte ChaCha key is four consecutive SplitMix64 outputs started
//!    from state `h`, each written little endian.
//!
//! Integers in `[0, n)` are drawn as the high 64 bits of `next_u64() * n`.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a64(bytes: impl IntoIterator<Item = u8>) -> u64 {
    bytes
        .into_iter()
        .fold(FNV_OFFSET, |h, b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

/// SplitMix64 step: advances `state` and returns the mixed output.
#[inline]
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn clip_digest(seed: u64, clip_id: &str) -> u64 {
    fnv1a64(seed.to_le_bytes().into_iter().chain(clip_id.bytes()))
}

/// The random stream for one clip.
pub fn clip_rng(seed: u64, clip_id: &str) -> ChaCha8Rng {
    let mut state = clip_digest(seed, clip_id);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Uniform integer in `[0, n)`; `n` must be nonzero.
#[inline]
pub fn below(rng: &mut impl RngCore, n: usize) -> usize {
    debug_assert!(n > 0);
    ((rng.next_u64() as u128 * n as u128) >> 64) as usize
}

/// Fisher-Yates shuffle driven by [`below`].
pub fn shuffle<T>(rng: &mut impl RngCore, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        items.swap(i, below(rng, i + 1));
    }
}
