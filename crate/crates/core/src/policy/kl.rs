use super::{select_argmax, Policy, SlidingWindow};
use crate::builders::ceil_power;

const KL_PRECISION: f64 = 1e-6;

/// Bernoulli divergence `kl(p, q)` with the `0 ln 0 = 0` convention.
pub fn bernoulli_kl(p: f64, q: f64) -> f64 {
    let term = |x: f64, y: f64| if x == 0.0 { 0.0 } else { x * (x / y).ln() };
    term(p, q) + term(1.0 - p, 1.0 - q)
}

/// Largest `q ∈ [p, 1]` with `n·kl(p, q) ≤ budget`, by bisection.
pub fn kl_upper_bound(p: f64, n: f64, budget: f64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    if budget <= 0.0 {
        return p;
    }
    let (mut lo, mut hi) = (p, 1.0);
    if n * bernoulli_kl(p, hi) <= budget {
        return hi;
    }
    while hi - lo > KL_PRECISION {
        let mid = 0.5 * (lo + hi);
        if n * bernoulli_kl(p, mid) <= budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// `ln t + c ln ln t`, dropping the second term while `ln ln t ≤ 0`.
fn exploration_budget(t: f64, c: f64) -> f64 {
    let lt = t.ln();
    if lt > 1.0 {
        lt + c * lt.ln()
    } else {
        lt.max(0.0)
    }
}

/// KL-UCB on Bernoulli divergences; rewards are clipped to `[0, 1]`.
#[derive(Debug, Clone)]
pub struct KlUcb {
    c: f64,
    sums: Vec<f64>,
    counts: Vec<usize>,
}

impl KlUcb {
    pub fn new(num_arms: usize, c: f64) -> Self {
        Self {
            c,
            sums: vec![0.0; num_arms],
            counts: vec![0; num_arms],
        }
    }

    pub fn index(&self, arm: usize, t: usize) -> f64 {
        let n = self.counts[arm];
        if n == 0 {
            return f64::INFINITY;
        }
        let mean = self.sums[arm] / n as f64;
        kl_upper_bound(mean, n as f64, exploration_budget(t as f64, self.c))
    }
}

impl Policy for KlUcb {
    fn name(&self) -> &'static str {
        "klucb"
    }

    fn reset(&mut self, _seed: u64) {
        *self = Self::new(self.counts.len(), self.c);
    }

    fn select(&mut self, t: usize) -> usize {
        if let Some(arm) = self.counts.iter().position(|&n| n == 0) {
            return arm;
        }
        let indices: Vec<f64> = (0..self.counts.len()).map(|i| self.index(i, t)).collect();
        select_argmax(&indices)
    }

    fn update(&mut self, arm: usize, reward: f64, _t: usize) {
        self.sums[arm] += reward.clamp(0.0, 1.0);
        self.counts[arm] += 1;
    }

    fn describe(&self) -> String {
        format!("klucb c={}", self.c)
    }
}

/// KL-UCB on statistics from the last `τ` rounds.
#[derive(Debug, Clone)]
pub struct SwKlUcb {
    window: SlidingWindow,
    c: f64,
}

impl SwKlUcb {
    pub fn new(num_arms: usize, tau: usize, c: f64) -> Self {
        Self {
            window: SlidingWindow::new(num_arms, tau),
            c,
        }
    }

    /// `⌈T^{4/5}⌉`, i.e. `σ^{−4/5}` for a drift rate `σ = 1/T`.
    pub fn default_tau(horizon: usize) -> usize {
        ceil_power(horizon, 0.8).max(1)
    }

    pub fn index(&self, arm: usize, t: usize) -> f64 {
        match self.window.mean(arm) {
            None => f64::INFINITY,
            Some(m) => {
                let n = self.window.count(arm) as f64;
                let horizon = t.min(self.window.tau()) as f64;
                kl_upper_bound(m, n, exploration_budget(horizon, self.c))
            }
        }
    }
}

impl Policy for SwKlUcb {
    fn name(&self) -> &'static str {
        "sw_klucb"
    }

    fn reset(&mut self, _seed: u64) {
        self.window.clear();
    }

    fn select(&mut self, t: usize) -> usize {
        let indices: Vec<f64> = (0..self.window.num_arms())
            .map(|i| self.index(i, t))
            .collect();
        select_argmax(&indices)
    }

    fn update(&mut self, arm: usize, reward: f64, _t: usize) {
        self.window.push(arm, reward.clamp(0.0, 1.0));
    }

    fn describe(&self) -> String {
        format!("sw_klucb tau={} c={}", self.window.tau(), self.c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_oracle(p: f64, n: f64, budget: f64) -> f64 {
        (0..=100_000)
            .map(|i| i as f64 / 100_000.0)
            .filter(|q| *q >= p && n * bernoulli_kl(p, *q) <= budget)
            .fold(p, f64::max)
    }

    #[test]
    fn kl_basics() {
        assert_eq!(bernoulli_kl(0.5, 0.5), 0.0);
        assert!(kl_upper_bound(0.5, 10.0, 1.0) >= 0.5);
        // at p = 0 the constraint is -ln(1-q) <= budget
        let q = kl_upper_bound(0.0, 1.0, 50.0);
        assert!(q > 1.0 - 1e-6);
    }

    #[test]
    fn bisection_matches_grid() {
        let budget = exploration_budget(100.0, 3.0);
        assert!((budget - (100f64.ln() + 3.0 * 100f64.ln().ln())).abs() < 1e-12);
        let fast = kl_upper_bound(0.2, 10.0, budget);
        let slow = grid_oracle(0.2, 10.0, budget);
        assert!((fast - slow).abs() < 1e-4, "{fast} vs {slow}");
    }

    #[test]
    fn forced_first_pulls() {
        let mut p = KlUcb::new(3, 3.0);
        for t in 1..=3 {
            let a = p.select(t);
            assert_eq!(a, t - 1);
            p.update(a, 0.5, t);
        }
    }

    #[test]
    fn windowed_variant() {
        let mut p = SwKlUcb::new(2, 4, 3.0);
        assert_eq!(p.index(0, 1), f64::INFINITY);
        p.update(0, 1.0, 1);
        assert_eq!(p.window.mean(0), Some(1.0));
        let big = SwKlUcb::new(2, 1_000_000, 3.0);
        let mut plain = KlUcb::new(2, 3.0);
        let mut sw = big;
        for (t, (a, r)) in [(0, 0.2), (1, 0.9), (0, 0.4)].iter().enumerate() {
            plain.update(*a, *r, t + 1);
            sw.update(*a, *r, t + 1);
        }
        assert_eq!(plain.index(0, 4), sw.index(0, 4));
        let budget = exploration_budget(4.0, 3.0);
        assert!((sw.index(0, 4) - grid_oracle(0.3, 2.0, budget)).abs() < 1e-4);
        assert_eq!(SwKlUcb::default_tau(100_000), 10_000);
    }
}
