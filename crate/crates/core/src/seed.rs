//! Deterministic seed derivation.
//!
//! Every random draw in this workspace flows from an explicit `u64` seed.
//! Sub-streams (per instance, per measurement, per matching) are derived by
//! hashing the parent seed together with a domain label and integer indices,
//! so independent streams never collide and every run is reproducible
//! bit-for-bit.

use sha2::{Digest, Sha256};

/// Derive a child seed from `base`, a domain `label`, and `indices`.
///
/// The child is the first 8 bytes, big-endian, of
/// `SHA-256(base_be || label || 0x00 || index_be ...)`.
pub fn derive_seed(base: u64, label: &str, indices: &[u64]) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(base.to_be_bytes());
    hasher.update(label.as_bytes());
    hasher.update([0u8]);
    for idx in indices {
        hasher.update(idx.to_be_bytes());
    }
    let digest = hasher.finalize();
    u64::from_be_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}
