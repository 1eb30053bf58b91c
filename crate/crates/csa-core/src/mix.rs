//! Seed derivation shared by the randomized modules.

/// SplitMix64 step: a cheap, well-mixed 64-bit permutation used to derive
/// independent seeds from (base seed, index) pairs. Standard constants.
pub(crate) fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
