//! Deterministic per-run random streams.
//!
//! Every run draws its permutations from a ChaCha8 stream keyed by
//! `(seed, stream)`. ChaCha is counter based, so the output depends only on
//! the key and the position in the stream, never on the platform.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Identifier echoed into configs and reports.
pub const RNG_ALGORITHM: &str = "chacha8(rand_chacha 0.3)+fisher-yates(rand 0.8)";

pub type RunRng = ChaCha8Rng;

pub fn run_rng(seed: u64, stream: u64) -> RunRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stable 64-bit stream id for a run label (first eight bytes of its SHA-256).
pub fn stream_id(run_label: &str) -> u64 {
    let digest = Sha256::digest(run_label.as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// Fisher-Yates shuffle of `0..n`.
pub fn permutation(rng: &mut RunRng, n: usize) -> Vec<usize> {
    let mut tau: Vec<usize> = (0..n).collect();
    tau.shuffle(rng);
    tau
}

pub fn is_permutation(tau: &[usize]) -> bool {
    let mut seen = vec![false; tau.len()];
    for &t in tau {
        if t >= tau.len() || seen[t] {
            return false;
        }
        seen[t] = true;
    }
    true
}
