//! Deterministic random streams.
//!
//! Every stochastic operation takes an explicit [`Stream`]. Streams for
//! independent actors (a client in a round, a local step, a mask pair) are
//! derived from a root seed and a path of integer labels, so results do not
//! depend on thread scheduling or on the order in which streams are created.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// The generator used throughout the crate.
pub type Stream = ChaCha8Rng;

/// Labels separating the purposes a stream can be derived for.
pub mod label {
    pub const CLIENT_SAMPLING: u64 = 1;
    pub const GRADIENT: u64 = 2;
    pub const MASK: u64 = 3;
    pub const RESPONSE: u64 = 4;
    pub const ROUNDING: u64 = 5;
    pub const SPARSIFY: u64 = 6;
    pub const SYNTHETIC: u64 = 7;
}

/// Hashes `seed` and `path` into a 32-byte ChaCha key.
pub fn derive_key(seed: u64, path: &[u64]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update((path.len() as u64).to_le_bytes());
    for p in path {
        h.update(p.to_le_bytes());
    }
    let digest = h.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    key
}

/// A stream keyed by `(seed, path)`.
pub fn stream(seed: u64, path: &[u64]) -> Stream {
    Stream::from_seed(derive_key(seed, path))
}

/// A plain stream from a 64-bit seed, for callers that do not need derivation.
pub fn seeded(seed: u64) -> Stream {
    Stream::seed_from_u64(seed)
}
