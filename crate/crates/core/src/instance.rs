//! Bandit instances and the instance-level functionals: cumulative increment,
//! average rewards and gaps, and the oracle constant arm.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::curve::RewardCurve;
use crate::error::{domain, Error, Result};
use crate::noise::NoiseModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Arm {
    pub curve: RewardCurve,
    #[serde(default)]
    pub noise: NoiseModel,
}

impl Arm {
    pub fn new(curve: RewardCurve, noise: NoiseModel) -> Self {
        Self { curve, noise }
    }
}

/// A rested bandit: one reward curve and noise model per arm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BanditInstance {
    pub label: String,
    pub arms: Vec<Arm>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    label: String,
    arms: Vec<Arm>,
}

impl<'de> Deserialize<'de> for BanditInstance {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawInstance::deserialize(d)?;
        BanditInstance::new(raw.label, raw.arms).map_err(serde::de::Error::custom)
    }
}

impl BanditInstance {
    pub fn new(label: impl Into<String>, arms: Vec<Arm>) -> Result<Self> {
        if arms.is_empty() {
            return domain("an instance needs at least one arm");
        }
        Ok(Self {
            label: label.into(),
            arms,
        })
    }

    /// Builds an instance whose arms share one noise model.
    pub fn from_curves(
        label: impl Into<String>,
        curves: Vec<RewardCurve>,
        noise: NoiseModel,
    ) -> Result<Self> {
        Self::new(
            label,
            curves.into_iter().map(|c| Arm::new(c, noise)).collect(),
        )
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn with_noise(mut self, noise: NoiseModel) -> Self {
        for arm in &mut self.arms {
            arm.noise = noise;
        }
        self
    }

    pub fn is_noiseless(&self) -> bool {
        self.arms.iter().all(|a| a.noise.is_noiseless())
    }

    /// Largest subgaussian scale over the arms.
    pub fn noise_scale(&self) -> f64 {
        self.arms
            .iter()
            .map(|a| a.noise.subgaussian_scale())
            .fold(0.0, f64::max)
    }

    /// Whether every arm is non-decreasing and concave on pulls `[1, max_n]`.
    pub fn is_rising_on(&self, max_n: usize) -> bool {
        self.arms.iter().all(|a| a.curve.is_rising_on(max_n))
    }

    /// Cumulative increment `Υ(M, q) = Σ_{l=1}^{M−1} max_i γ_i(l)^q`.
    ///
    /// Uses `0^0 = 1`, so `Υ(M, 0) = M − 1` for every instance.
    pub fn cumulative_increment(&self, horizon: usize, q: f64) -> Result<f64> {
        if horizon == 0 {
            return domain("horizon must be at least 1");
        }
        if !(0.0..=1.0).contains(&q) {
            return domain(format!("exponent q = {q} outside [0, 1]"));
        }
        let power = |x: f64| if q == 0.0 { 1.0 } else { x.powf(q) };
        let total = (1..horizon)
            .map(|l| {
                self.arms
                    .iter()
                    .map(|a| power(a.curve.increment(l)))
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .sum();
        Ok(total)
    }

    /// Total variation `V_M = Σ_{l=1}^{M−1} max_i γ_i(l)`.
    pub fn total_variation(&self, horizon: usize) -> f64 {
        let mut total = 0.0;
        for l in 1..horizon {
            let mut best = f64::NEG_INFINITY;
            for arm in &self.arms {
                let g = arm.curve.increment(l);
                if g > best {
                    best = g;
                }
            }
            total += best;
        }
        total
    }

    /// `Σ_{n=1}^{T} μ_i(n)` for every arm.
    pub fn cumulative_means(&self, horizon: usize) -> Vec<f64> {
        self.arms
            .iter()
            .map(|a| (1..=horizon).map(|n| a.curve.mean(n)).sum())
            .collect()
    }

    /// Arm maximizing `Σ_{l=1}^{T} μ_i(l)`; ties go to the lowest index.
    pub fn oracle_constant_arm(&self, horizon: usize) -> Result<usize> {
        if horizon == 0 {
            return domain("horizon must be at least 1");
        }
        let sums = self.cumulative_means(horizon);
        let mut best = 0;
        for (i, s) in sums.iter().enumerate() {
            if *s > sums[best] {
                best = i;
            }
        }
        Ok(best)
    }

    /// Per-arm average expected reward `μ̄_i(T)` and average gap `Δ̄_i`.
    pub fn average_reward_and_gap(&self, horizon: usize) -> Result<AverageRewards> {
        let star = self.oracle_constant_arm(horizon)?;
        let means: Vec<f64> = self
            .cumulative_means(horizon)
            .into_iter()
            .map(|s| s / horizon as f64)
            .collect();
        let gaps = means.iter().map(|m| means[star] - m).collect();
        Ok(AverageRewards {
            oracle_arm: star,
            means,
            gaps,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AverageRewards {
    pub oracle_arm: usize,
    /// `μ̄_i(T)`.
    pub means: Vec<f64>,
    /// `Δ̄_i = μ̄_{i*}(T) − μ̄_i(T)`.
    pub gaps: Vec<f64>,
}

/// Two instances whose mean curves coincide arm-wise for the first
/// `indistinguishable_until` pulls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstancePair {
    pub a: BanditInstance,
    pub b: BanditInstance,
    pub indistinguishable_until: usize,
}

impl InstancePair {
    /// First `(arm, pull)` in `[1, indistinguishable_until]` where the two
    /// members disagree.
    pub fn first_disagreement(&self) -> Option<(usize, usize)> {
        for (i, (x, y)) in self.a.arms.iter().zip(&self.b.arms).enumerate() {
            for n in 1..=self.indistinguishable_until {
                if x.curve.mean(n) != y.curve.mean(n) {
                    return Some((i, n));
                }
            }
        }
        None
    }
}
