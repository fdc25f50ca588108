use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Master seed from which every trial derives an independent stream.
///
/// Trial `t` uses `ChaCha8Rng::seed_from_u64(trial_seed(t))`, where
/// `trial_seed` is the SplitMix64 finalizer applied to
/// `master_seed + (t + 1) · 0x9E3779B97F4A7C15` (wrapping).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64_finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SeedSpec {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    pub fn trial_seed(&self, trial_index: u64) -> u64 {
        splitmix64_finalize(
            self.master_seed
                .wrapping_add(trial_index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)),
        )
    }

    pub fn trial_rng(&self, trial_index: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.trial_seed(trial_index))
    }
}
