//! Deterministic substream derivation.
//!
//! Every random draw in the crate comes from a ChaCha stream derived from a
//! master 64-bit seed together with an operation tag and up to two indices
//! (typically a step index and an element or sample index). Substreams for
//! distinct keys are statistically independent, and the stream for a given
//! key never depends on how many other streams were consumed first, so
//! results are reproducible regardless of evaluation order or thread count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Operation tags keying the substreams. Values are arbitrary but fixed:
/// changing them changes every sampled result for a given seed.
pub mod tags {
    /// Random-subset draws `R(x)` made directly by a caller.
    pub const SUBSET: u32 = 1;
    /// Multilinear-extension value estimation.
    pub const F_ESTIMATE: u32 = 2;
    /// Element-weight estimation inside the continuous greedy.
    pub const WEIGHT: u32 = 3;
    /// Partial-derivative estimation inside sampled local search.
    pub const PARTIAL: u32 = 4;
    /// The guide-set draw of the combined pipeline.
    pub const GUIDE_DRAW: u32 = 5;
    /// The final selection coin of the combined pipeline.
    pub const COIN: u32 = 6;
    /// Instance generation.
    pub const GENERATE: u32 = 7;
    /// Per-row seeds of the benchmark runner.
    pub const BENCH: u32 = 8;
    /// Value estimation of the pipeline outputs in sampled mode.
    pub const OUTPUT_ESTIMATE: u32 = 9;
}

const GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GAMMA);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes `(master, tag, a, b)` into a single well-scrambled 64-bit value.
pub fn mix(master: u64, tag: u32, a: u64, b: u64) -> u64 {
    let mut state = master;
    let mut acc = splitmix(&mut state);
    state ^= u64::from(tag).wrapping_mul(GAMMA);
    acc ^= splitmix(&mut state);
    state ^= a.wrapping_mul(0xc2b2_ae3d_27d4_eb4f);
    acc ^= splitmix(&mut state);
    state ^= b.wrapping_mul(0x1656_67b1_9e37_79f9);
    acc ^= splitmix(&mut state);
    acc
}

/// Returns the ChaCha substream for `(master, tag, a, b)`.
pub fn substream(master: u64, tag: u32, a: u64, b: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(master, tag, a, b))
}
