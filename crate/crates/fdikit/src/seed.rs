//! Deterministic seed derivation.
//!
//! Every random draw in the pipeline comes from a ChaCha8 stream whose seed
//! is derived from a base seed plus structural coordinates (scenario id,
//! segment index, tree index, ...). The derivation uses fixed integer
//! arithmetic only, so seeds are identical across platforms and runs.

/// FNV-1a over raw bytes; used to hash string identifiers into seed material.
pub fn hash_str(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a base seed with structural coordinates into a child seed.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut state = splitmix64(base);
    for p in parts {
        state = splitmix64(state ^ splitmix64(*p));
    }
    state
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivation_is_stable() {
        // Frozen values: changing these changes every downstream stream.
        assert_eq!(hash_str("cycle-op"), 0xe23a_dfa8_c122_10a3);
        assert_eq!(derive_seed(7, &[1, 2]), derive_seed(7, &[1, 2]));
        assert_ne!(derive_seed(7, &[1, 2]), derive_seed(7, &[2, 1]));
        assert_ne!(derive_seed(7, &[1]), derive_seed(8, &[1]));
    }
}
