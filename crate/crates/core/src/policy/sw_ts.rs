use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};

use super::{select_argmax, Policy, SlidingWindow};
use crate::builders::ceil_power;

/// Beta–Bernoulli Thompson sampling over the last `τ` rounds. Each reward
/// is turned into a success with probability equal to the clipped reward.
#[derive(Debug, Clone)]
pub struct SwTs {
    window: SlidingWindow,
    rng: ChaCha8Rng,
}

impl SwTs {
    pub fn new(num_arms: usize, tau: usize) -> Self {
        Self {
            window: SlidingWindow::new(num_arms, tau),
            rng: ChaCha8Rng::seed_from_u64(0),
        }
    }

    /// `⌈T^{1−β}⌉`.
    pub fn default_tau(horizon: usize, beta: f64) -> usize {
        ceil_power(horizon, 1.0 - beta).max(1)
    }

    /// Posterior `Beta(1 + S, 1 + F)` of an arm.
    pub fn posterior(&self, arm: usize) -> (f64, f64) {
        let s = self.window.sum(arm).round();
        let f = self.window.count(arm) as f64 - s;
        (1.0 + s, 1.0 + f)
    }
}

impl Policy for SwTs {
    fn name(&self) -> &'static str {
        "sw_ts"
    }

    fn reset(&mut self, seed: u64) {
        self.window.clear();
        self.rng = ChaCha8Rng::seed_from_u64(seed);
    }

    fn select(&mut self, _t: usize) -> usize {
        let draws: Vec<f64> = (0..self.window.num_arms())
            .map(|i| {
                let (a, b) = self.posterior(i);
                Beta::new(a, b)
                    .expect("posterior parameters are at least 1")
                    .sample(&mut self.rng)
            })
            .collect();
        select_argmax(&draws)
    }

    fn update(&mut self, arm: usize, reward: f64, _t: usize) {
        let success = self.rng.random::<f64>() < reward.clamp(0.0, 1.0);
        self.window.push(arm, if success { 1.0 } else { 0.0 });
    }

    fn describe(&self) -> String {
        format!("sw_ts tau={}", self.window.tau())
    }
}
