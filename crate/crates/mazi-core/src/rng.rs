//! Seed management. All randomness in the crate flows through one base seed
//! expanded into independent per-purpose streams, so that partial re-runs
//! (e.g. regenerating walks for one level) stay reproducible.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tags for deriving independent streams from one base seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    EmbeddingInit,
    Walks,
    Negatives,
    LinkSplit,
    DecoderSplit,
    DecoderInit,
    ClassifierSplit,
    GenDegrees,
    GenStubs,
    GenLabels,
    Shuffle,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::EmbeddingInit => 1,
            Stream::Walks => 2,
            Stream::Negatives => 3,
            Stream::LinkSplit => 4,
            Stream::DecoderSplit => 5,
            Stream::DecoderInit => 6,
            Stream::ClassifierSplit => 7,
            Stream::GenDegrees => 8,
            Stream::GenStubs => 9,
            Stream::GenLabels => 10,
            Stream::Shuffle => 11,
        }
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic, platform-independent RNG for (seed, purpose, index).
/// `index` distinguishes parallel sub-streams, e.g. one per (node, walk).
pub fn stream_rng(seed: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    let mut state = seed
        .wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(stream.tag());
    let mut key = [0u8; 32];
    // Fold the index in before expanding the key.
    state ^= index.wrapping_mul(0xd134_2543_de82_ef95);
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
