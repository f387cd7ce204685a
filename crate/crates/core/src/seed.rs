//! Deterministic seeding. Every random draw in the pipeline comes from a
//! ChaCha stream keyed by a digest of the global seed and the work item.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type PipelineRng = ChaCha8Rng;

/// Seed for one work item, e.g. `derive_seed(seed, &[url, capture_index, stage])`.
pub fn derive_seed(global: u64, parts: &[&str]) -> u64 {
    let mut h = Sha256::new();
    h.update(global.to_le_bytes());
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

pub fn rng_for(global: u64, parts: &[&str]) -> PipelineRng {
    PipelineRng::seed_from_u64(derive_seed(global, parts))
}
