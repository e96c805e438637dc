//! Labeled sub-seeds fanned out from one root seed.

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic child seed of `root` for the component named `label`.
pub fn derive(root: u64, label: &str) -> u64 {
    // FNV-1a over the label, then mixed with the root.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(splitmix64(root) ^ h)
}

/// Child seed indexed by position, e.g. one per training instance.
pub fn derive_indexed(root: u64, label: &str, index: usize) -> u64 {
    splitmix64(derive(root, label) ^ splitmix64(index as u64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_and_roots_separate() {
        assert_eq!(derive(7, "init"), derive(7, "init"));
        assert_ne!(derive(7, "init"), derive(7, "split"));
        assert_ne!(derive(7, "init"), derive(8, "init"));
        assert_ne!(derive_indexed(7, "x", 0), derive_indexed(7, "x", 1));
    }
}
