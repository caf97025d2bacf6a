use super::{select_argmax, Policy, SlidingWindow};

/// UCB on statistics from the last `τ` rounds.
#[derive(Debug, Clone)]
pub struct SwUcb {
    window: SlidingWindow,
    xi: f64,
}

impl SwUcb {
    pub fn new(num_arms: usize, tau: usize, xi: f64) -> Self {
        Self {
            window: SlidingWindow::new(num_arms, tau),
            xi,
        }
    }

    /// `⌈4√(T ln T)⌉`.
    pub fn default_tau(horizon: usize) -> usize {
        let t = horizon as f64;
        ((4.0 * (t * t.ln()).sqrt()).ceil() as usize).max(1)
    }

    /// Windowed mean plus `√(ξ ln(min(t, τ)) / N)`; `+∞` for absent arms.
    pub fn index(&self, arm: usize, t: usize) -> f64 {
        match self.window.mean(arm) {
            None => f64::INFINITY,
            Some(m) => {
                let n = self.window.count(arm) as f64;
                let horizon = t.min(self.window.tau()) as f64;
                m + (self.xi * horizon.ln() / n).sqrt()
            }
        }
    }
}

impl Policy for SwUcb {
    fn name(&self) -> &'static str {
        "sw_ucb"
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
        self.window.push(arm, reward);
    }

    fn describe(&self) -> String {
        format!("sw_ucb tau={} xi={}", self.window.tau(), self.xi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_window() {
        assert_eq!(SwUcb::default_tau(10_000), 1214);
    }

    #[test]
    fn single_reward_mean_and_absent_arm() {
        let mut p = SwUcb::new(2, 100, 0.6);
        p.update(0, 0.3, 1);
        let expected = 0.3 + (0.6 * 2f64.ln()).sqrt();
        assert!((p.index(0, 2) - expected).abs() < 1e-15);
        assert_eq!(p.index(1, 2), f64::INFINITY);
        assert_eq!(p.select(2), 1);
    }

    #[test]
    fn large_window_is_plain_ucb() {
        let mut p = SwUcb::new(2, 1_000_000, 0.6);
        let rewards = [(0, 0.2), (1, 0.9), (0, 0.4), (1, 0.7)];
        for (t, (a, r)) in rewards.iter().enumerate() {
            p.update(*a, *r, t + 1);
        }
        let ucb0 = 0.3 + (0.6 * 5f64.ln() / 2.0).sqrt();
        assert!((p.index(0, 5) - ucb0).abs() < 1e-15);
    }
}
