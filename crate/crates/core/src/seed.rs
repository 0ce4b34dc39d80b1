//! Deterministic derivation of independent RNG streams.
//!
//! Every randomized stage (graph topology, edge values, the two sample
//! blocks, ...) draws from its own child stream so that changing how many
//! values one stage consumes never perturbs another. A child seed is the
//! parent seed mixed with a label through splitmix64, which is stable across
//! platforms and Rust versions.

/// One round of the splitmix64 output function.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a over the label bytes; cheap, stable, and good enough to separate
/// the handful of labels used in this crate.
fn label_hash(label: &str) -> u64 {
    let mut h = 0xCBF2_9CE4_8422_2325_u64;
    for &b in label.as_bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// Derives the child seed for the stream identified by `label`.
pub fn child_seed(parent: u64, label: &str) -> u64 {
    splitmix64(splitmix64(parent) ^ label_hash(label))
}
