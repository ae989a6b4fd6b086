//! SplitMix64 generator used for all sampling.
//!
//! The generator has a single 64-bit word of state and the published
//! constants below, so any implementation in any language reproduces the
//! same stream bit for bit. Output `i` of the stream seeded with `s` is
//! available directly as [`stream_value`]`(s, i)` without stepping, which
//! lets samplers shard work across individuals while staying identical to
//! a serial run.

/// Weyl-sequence increment (the golden ratio in 64-bit fixed point).
pub const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const MIX_A: u64 = 0xBF58_476D_1CE4_E5B9;
const MIX_B: u64 = 0x94D0_49BB_1331_11EB;

/// Sequential form of the generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        finalize(self.state)
    }
}

/// The `index`-th output (0-based) of the stream seeded with `seed`.
pub fn stream_value(seed: u64, index: u64) -> u64 {
    finalize(seed.wrapping_add(GAMMA.wrapping_mul(index.wrapping_add(1))))
}

fn finalize(word: u64) -> u64 {
    let mut z = word;
    z = (z ^ (z >> 30)).wrapping_mul(MIX_A);
    z = (z ^ (z >> 27)).wrapping_mul(MIX_B);
    z ^ (z >> 31)
}
