//! Reward noise models and counter-based sampling.
//!
//! Every draw is a pure function of a [`NoiseKey`]; two instances sampled
//! with the same key see the same underlying random numbers, which is what
//! makes lower-bound pairs indistinguishable bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseModel {
    /// Reward equals the expected reward.
    #[default]
    None,
    /// `μ(n) + ζ` with `ζ ~ N(0, sigma²)`.
    Gaussian { sigma: f64 },
    /// A `{0, 1}` draw with success probability `μ(n)`.
    Bernoulli,
}

/// Identifies one reward draw: `(seed, round, arm, pull)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NoiseKey {
    pub seed: u64,
    pub round: u64,
    pub arm: u64,
    pub pull: u64,
}

/// SplitMix64 finalizer.
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl NoiseKey {
    pub fn new(seed: u64, round: usize, arm: usize, pull: usize) -> Self {
        Self {
            seed,
            round: round as u64,
            arm: arm as u64,
            pull: pull as u64,
        }
    }

    fn digest(&self) -> u64 {
        let mut h = mix64(self.seed);
        for part in [self.round, self.arm, self.pull] {
            h = mix64(h ^ part);
        }
        h
    }

    /// A generator whose stream depends only on the key.
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.digest())
    }
}

impl NoiseModel {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return domain(format!(
                "gaussian sigma must be finite and >= 0, got {sigma}"
            ));
        }
        Ok(NoiseModel::Gaussian { sigma })
    }

    /// Subgaussian scale `σ` of the reward noise.
    pub fn subgaussian_scale(&self) -> f64 {
        match self {
            NoiseModel::None => 0.0,
            NoiseModel::Gaussian { sigma } => *sigma,
            NoiseModel::Bernoulli => 0.5,
        }
    }

    pub fn is_noiseless(&self) -> bool {
        match self {
            NoiseModel::None => true,
            NoiseModel::Gaussian { sigma } => *sigma == 0.0,
            NoiseModel::Bernoulli => false,
        }
    }

    /// Draws a reward with expectation `mean`.
    pub fn sample(&self, mean: f64, key: NoiseKey) -> f64 {
        match self {
            NoiseModel::None => mean,
            NoiseModel::Gaussian { sigma } => {
                let z: f64 = key.rng().sample(StandardNormal);
                mean + sigma * z
            }
            NoiseModel::Bernoulli => {
                if key.rng().random::<f64>() < mean {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}
