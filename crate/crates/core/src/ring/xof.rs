//! Thin wrappers over SHAKE-128/256 used for all deterministic expansion.

use sha3::digest::{ExtendableOutput, Update, XofReader};
use sha3::{Shake128, Shake256};

/// SHAKE-128 stream seeded with `seed` plus domain-separation bytes.
pub fn shake128(seed: &[u8], domain: &[u8]) -> impl XofReader {
    let mut h = Shake128::default();
    h.update(seed);
    h.update(domain);
    h.finalize_xof()
}

/// SHAKE-256 stream seeded with `seed` plus domain-separation bytes.
pub fn shake256(seed: &[u8], domain: &[u8]) -> impl XofReader {
    let mut h = Shake256::default();
    h.update(seed);
    h.update(domain);
    h.finalize_xof()
}

/// Reads `N` bytes out of a SHAKE-256 stream.
pub fn shake256_bytes<const N: usize>(seed: &[u8], domain: &[u8]) -> [u8; N] {
    let mut out = [0u8; N];
    shake256(seed, domain).read(&mut out);
    out
}
