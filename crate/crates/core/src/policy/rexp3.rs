use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Policy;

/// Exp3 restarted every `Δ_T` rounds.
#[derive(Debug, Clone)]
pub struct Rexp3 {
    epoch: usize,
    gamma: f64,
    log_weights: Vec<f64>,
    probs: Vec<f64>,
    rng: ChaCha8Rng,
}

impl Rexp3 {
    pub fn new(num_arms: usize, epoch: usize, gamma: f64) -> Self {
        Self {
            epoch: epoch.max(1),
            gamma,
            log_weights: vec![0.0; num_arms],
            probs: vec![1.0 / num_arms as f64; num_arms],
            rng: ChaCha8Rng::seed_from_u64(0),
        }
    }

    /// `⌈(K ln K)^{1/3} (T / V_T)^{2/3}⌉`.
    pub fn default_epoch(num_arms: usize, horizon: usize, variation: f64) -> usize {
        let k = num_arms as f64;
        let d = (k * k.ln()).cbrt() * (horizon as f64 / variation).powf(2.0 / 3.0);
        (d.ceil() as usize).max(1)
    }

    /// `min{1, √(K ln K / ((e − 1) Δ_T))}`.
    pub fn default_gamma(num_arms: usize, epoch: usize) -> f64 {
        let k = num_arms as f64;
        let g = (k * k.ln() / ((std::f64::consts::E - 1.0) * epoch as f64)).sqrt();
        if g > 0.0 {
            g.min(1.0)
        } else {
            1.0
        }
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    fn refresh_probs(&mut self) {
        let k = self.log_weights.len() as f64;
        let top = self
            .log_weights
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = self.log_weights.iter().map(|l| (l - top).exp()).collect();
        let total: f64 = w.iter().sum();
        for (p, wi) in self.probs.iter_mut().zip(w) {
            *p = (1.0 - self.gamma) * wi / total + self.gamma / k;
        }
    }
}

impl Policy for Rexp3 {
    fn name(&self) -> &'static str {
        "rexp3"
    }

    fn reset(&mut self, seed: u64) {
        self.log_weights.iter_mut().for_each(|w| *w = 0.0);
        self.refresh_probs();
        self.rng = ChaCha8Rng::seed_from_u64(seed);
    }

    fn select(&mut self, t: usize) -> usize {
        if (t - 1).is_multiple_of(self.epoch) {
            self.log_weights.iter_mut().for_each(|w| *w = 0.0);
        }
        self.refresh_probs();
        let u: f64 = self.rng.random();
        let mut acc = 0.0;
        for (i, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        self.probs.len() - 1
    }

    fn update(&mut self, arm: usize, reward: f64, _t: usize) {
        let k = self.log_weights.len() as f64;
        let estimate = reward.clamp(0.0, 1.0) / self.probs[arm];
        self.log_weights[arm] += self.gamma * estimate / k;
    }

    fn describe(&self) -> String {
        format!("rexp3 delta_t={} gamma={}", self.epoch, self.gamma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epoch_length() {
        assert_eq!(Rexp3::default_epoch(10, 10_000, 10.0), 285);
    }

    #[test]
    fn probabilities_sum_to_one_and_reset_at_epochs() {
        let mut p = Rexp3::new(4, 7, 0.3);
        p.reset(1);
        for t in 1..=50 {
            let a = p.select(t);
            let total: f64 = p.probabilities().iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            if (t - 1) % 7 == 0 {
                assert!(p.probabilities().iter().all(|x| (x - 0.25).abs() < 1e-15));
            }
            p.update(a, if a == 2 { 1.0 } else { 0.1 }, t);
        }
    }
}
