use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Policy;

/// Successive elimination with randomized round-robin passes, random resets
/// of the active set (probability `φ` per round) and uniform exploration
/// (probability `ε` per round, reward not used for elimination).
#[derive(Debug, Clone)]
pub struct Ser4 {
    num_arms: usize,
    log_inv_delta: f64,
    eps: f64,
    phi: f64,
    active: Vec<usize>,
    order: Vec<usize>,
    position: usize,
    sums: Vec<f64>,
    samples: usize,
    pending_counted: bool,
    rng: ChaCha8Rng,
}

impl Ser4 {
    pub fn new(num_arms: usize, delta: f64, eps: f64, phi: f64) -> Self {
        let mut s = Self {
            num_arms,
            log_inv_delta: -delta.ln(),
            eps,
            phi,
            active: vec![],
            order: vec![],
            position: 0,
            sums: vec![],
            samples: 0,
            pending_counted: false,
            rng: ChaCha8Rng::seed_from_u64(0),
        };
        s.restart();
        s
    }

    /// `√(N / (T K ln(KT)))` for a switch budget `N`.
    pub fn default_phi(num_arms: usize, horizon: usize, switches: f64) -> f64 {
        let kt = (num_arms * horizon) as f64;
        let denom = kt * kt.ln();
        if denom > 0.0 {
            (switches / denom).sqrt().min(1.0)
        } else {
            0.0
        }
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    fn restart(&mut self) {
        self.active = (0..self.num_arms).collect();
        self.sums = vec![0.0; self.num_arms];
        self.samples = 0;
        self.start_pass();
    }

    fn start_pass(&mut self) {
        self.order = self.active.clone();
        self.order.shuffle(&mut self.rng);
        self.position = 0;
    }

    /// Drops arms whose mean trails the best by more than `2√(ln(1/δ)/(2n))`.
    fn eliminate(&mut self) {
        let n = self.samples as f64;
        let means: Vec<f64> = self.active.iter().map(|&i| self.sums[i] / n).collect();
        let best = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let radius = 2.0 * (self.log_inv_delta / (2.0 * n)).sqrt();
        let survivors: Vec<usize> = self
            .active
            .iter()
            .zip(&means)
            .filter(|(_, m)| best - **m <= radius)
            .map(|(i, _)| *i)
            .collect();
        self.active = survivors;
    }
}

impl Policy for Ser4 {
    fn name(&self) -> &'static str {
        "ser4"
    }

    fn reset(&mut self, seed: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.restart();
    }

    fn select(&mut self, _t: usize) -> usize {
        if self.phi > 0.0 && self.rng.random::<f64>() < self.phi {
            self.restart();
        }
        if self.eps > 0.0 && self.rng.random::<f64>() < self.eps {
            self.pending_counted = false;
            return self.rng.random_range(0..self.num_arms);
        }
        self.pending_counted = true;
        self.order[self.position]
    }

    fn update(&mut self, arm: usize, reward: f64, _t: usize) {
        if !self.pending_counted {
            return;
        }
        self.sums[arm] += reward;
        self.position += 1;
        if self.position == self.order.len() {
            self.samples += 1;
            self.eliminate();
            self.start_pass();
        }
    }

    fn describe(&self) -> String {
        format!(
            "ser4 delta={} eps={} phi={}",
            (-self.log_inv_delta).exp(),
            self.eps,
            self.phi
        )
    }
}
