//! Seed derivation and the per-scan random stream.
//!
//! Format notes (version 1, frozen for reproducibility):
//! - image ids are hashed with 64-bit FNV-1a;
//! - seeds are combined with the SplitMix64 finalizer (`mix64`);
//! - the stream is xoshiro256** seeded from the resolved seed via SplitMix64;
//! - bounded integers use rejection sampling on full 64-bit draws (values
//!   below `2^64 mod n` are discarded), so there is no modulo bias and every
//!   platform sees the same sequence.

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use serde::{Deserialize, Serialize};

/// Whether repeated scans of the same image draw fresh randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SeedPolicy {
    /// Every scan index yields a different stream.
    Stochastic { global_seed: u64, scan_index: u64 },
    /// The stream depends only on the global seed and the image id.
    FixedPerImage { global_seed: u64 },
}

impl SeedPolicy {
    pub fn global_seed(&self) -> u64 {
        match *self {
            SeedPolicy::Stochastic { global_seed, .. } | SeedPolicy::FixedPerImage { global_seed } => {
                global_seed
            }
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SeedPolicy::Stochastic { .. } => "stochastic",
            SeedPolicy::FixedPerImage { .. } => "fixed-per-image",
        }
    }
}

impl Default for SeedPolicy {
    fn default() -> Self {
        SeedPolicy::FixedPerImage { global_seed: 0 }
    }
}

const FIXED_DOMAIN: u64 = 0x6a09_e667_f3bc_c908;
const STOCHASTIC_DOMAIN: u64 = 0xbb67_ae85_84ca_a73b;

/// SplitMix64 output function.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Resolves the 64-bit seed of one scan.
pub fn resolve_seed(policy: &SeedPolicy, image_id: &[u8]) -> u64 {
    let id = fnv1a64(image_id);
    match *policy {
        SeedPolicy::FixedPerImage { global_seed } => {
            mix64(mix64(global_seed ^ FIXED_DOMAIN) ^ id)
        }
        SeedPolicy::Stochastic {
            global_seed,
            scan_index,
        } => mix64(mix64(mix64(global_seed ^ STOCHASTIC_DOMAIN) ^ id) ^ mix64(scan_index)),
    }
}

/// Resolved seed plus the generator it drives.
#[derive(Debug, Clone)]
pub struct SeedContext {
    resolved: u64,
    rng: Xoshiro256StarStar,
}

impl PartialEq for SeedContext {
    fn eq(&self, other: &Self) -> bool {
        self.resolved == other.resolved && self.rng == other.rng
    }
}

impl SeedContext {
    pub fn from_seed(resolved: u64) -> Self {
        SeedContext {
            resolved,
            rng: Xoshiro256StarStar::seed_from_u64(resolved),
        }
    }

    pub fn derive(policy: &SeedPolicy, image_id: &[u8]) -> Self {
        SeedContext::from_seed(resolve_seed(policy, image_id))
    }

    pub fn resolved_seed(&self) -> u64 {
        self.resolved
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform integer in `0..n`. Panics if `n == 0`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "empty range");
        let threshold = n.wrapping_neg() % n;
        loop {
            let x = self.rng.next_u64();
            if x >= threshold {
                return x % n;
            }
        }
    }
}

/// Convenience wrapper taking the policy's fields apart.
pub fn derive_scan_seed(policy: &SeedPolicy, image_id: &[u8]) -> SeedContext {
    SeedContext::derive(policy, image_id)
}
