//! Optimistic estimators of an arm's future expected reward.
//!
//! The deterministic estimator extrapolates the last observed increment; the
//! stochastic one averages `h` extrapolations built from the `2h` most recent
//! samples. [`IncrementalAccumulators`] maintains the stochastic estimate in
//! constant time per pull. Unbounded values are `f64::INFINITY`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Relative tolerance of the incremental estimator against its definition.
pub const INCREMENTAL_TOLERANCE: f64 = 1e-9;

/// `x − y` with `(+∞) − (+∞) = 0`.
pub fn top_diff(x: f64, y: f64) -> f64 {
    if x == f64::INFINITY && y == f64::INFINITY {
        0.0
    } else {
        x - y
    }
}

/// Rewards of one arm in pull order (`r(1)`, `r(2)`, ...).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ArmTrace {
    rewards: Vec<f64>,
    last_pull_round: usize,
}

impl ArmTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_rewards(rewards: Vec<f64>) -> Self {
        let last_pull_round = rewards.len();
        Self {
            rewards,
            last_pull_round,
        }
    }

    pub fn push(&mut self, reward: f64, round: usize) {
        self.rewards.push(reward);
        self.last_pull_round = round;
    }

    /// Number of pulls `N`.
    pub fn pulls(&self) -> usize {
        self.rewards.len()
    }

    pub fn last_pull_round(&self) -> usize {
        self.last_pull_round
    }

    /// Reward of the `l`-th pull, 1-based.
    pub fn reward(&self, l: usize) -> f64 {
        self.rewards[l - 1]
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }
}

/// Window width `h(N) = ⌊εN⌋`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSchedule {
    epsilon: f64,
}

impl WindowSchedule {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return domain(format!("epsilon = {epsilon} outside (0, 1/2)"));
        }
        Ok(Self { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn width(&self, pulls: usize) -> usize {
        (self.epsilon * pulls as f64).floor() as usize
    }
}

/// `μ(N) + (t − N)·γ(N − 1)` for `N ≥ 2`, otherwise `+∞`.
pub fn det_estimate(mu_at_n: f64, gamma_at_n_minus_1: f64, pulls: usize, t: usize) -> f64 {
    if pulls < 2 {
        return f64::INFINITY;
    }
    mu_at_n + (t as f64 - pulls as f64) * gamma_at_n_minus_1
}

/// Windowed estimate evaluated straight from its definition, `O(h)`.
pub fn stoch_estimate_naive(trace: &ArmTrace, h: usize, t: usize) -> f64 {
    let n = trace.pulls();
    if h == 0 || h > n / 2 {
        return f64::INFINITY;
    }
    let hf = h as f64;
    let mut total = 0.0;
    for l in n - h + 1..=n {
        let r = trace.reward(l);
        let slope = (r - trace.reward(l - h)) / hf;
        total += r + (t as f64 - l as f64) * slope;
    }
    total / hf
}

/// `σ(t − N + h − 1)·√(10·L/h³)` where `L = ln(1/δ)`; `+∞` when `h = 0`.
pub fn bonus_from_log(sigma: f64, pulls: usize, h: usize, t: usize, log_inv_delta: f64) -> f64 {
    if h == 0 {
        return f64::INFINITY;
    }
    if sigma == 0.0 {
        return 0.0;
    }
    let hf = h as f64;
    let lead = t as f64 - pulls as f64 + hf - 1.0;
    sigma * lead * (10.0 * log_inv_delta / (hf * hf * hf)).sqrt()
}

/// Exploration bonus at confidence `δ ∈ (0, 1)`.
pub fn bonus(sigma: f64, pulls: usize, h: usize, t: usize, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return domain(format!("delta = {delta} outside (0, 1)"));
    }
    Ok(bonus_from_log(sigma, pulls, h, t, -delta.ln()))
}

/// Running sums that give the windowed estimate in `O(1)`:
/// `a = Σ r(l)`, `b = Σ r(l−h)`, `c = Σ l·r(l)`, `d = Σ l·r(l−h)`
/// over the window `l ∈ [N−h+1, N]`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IncrementalAccumulators {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    h: usize,
    pulls: usize,
}

impl IncrementalAccumulators {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn width(&self) -> usize {
        self.h
    }

    pub fn pulls(&self) -> usize {
        self.pulls
    }

    /// Absorbs the newest reward of `trace` with window width `h` for the new
    /// pull count. The width may stay put or grow by one.
    pub fn push(&mut self, trace: &ArmTrace, h: usize) -> Result<()> {
        let n = trace.pulls();
        if n != self.pulls + 1 {
            return Err(Error::Contract(format!(
                "accumulators hold {} pulls but trace has {n}",
                self.pulls
            )));
        }
        if h < self.h || h > self.h + 1 {
            return Err(Error::Contract(format!(
                "window width moved from {} to {h}; it may grow by at most one per pull",
                self.h
            )));
        }
        if 2 * h > n {
            return Err(Error::Contract(format!(
                "window width {h} exceeds half of {n} pulls"
            )));
        }
        let r = |l: usize| trace.reward(l);
        let nf = n as f64;
        if h == 0 {
            // empty window, nothing to track
        } else if h == self.h {
            let (old, older) = (r(n - h), r(n - 2 * h));
            self.a += r(n) - old;
            self.b += old - older;
            self.c += nf * r(n) - (n - h) as f64 * old;
            self.d += nf * old - (n - h) as f64 * older;
        } else {
            let entering = r(n + 1 - 2 * h);
            self.a += r(n);
            self.b += entering;
            self.c += nf * r(n);
            self.d += (n - h) as f64 * entering + self.b;
        }
        self.h = h;
        self.pulls = n;
        Ok(())
    }

    /// `(1/h)(a + t(a − b)/h − (c − d)/h)`, or `+∞` while the window is empty.
    pub fn query(&self, t: usize) -> f64 {
        if self.h == 0 {
            return f64::INFINITY;
        }
        let h = self.h as f64;
        (self.a + (t as f64 * (self.a - self.b) - (self.c - self.d)) / h) / h
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn det_estimate_cases() {
        assert_eq!(det_estimate(0.5, 0.0, 10, 20), 0.5);
        assert_abs_diff_eq!(det_estimate(0.05, 0.01, 5, 9), 0.09, epsilon = 1e-15);
        assert_eq!(det_estimate(0.3, 0.1, 1, 50), f64::INFINITY);
        assert_eq!(det_estimate(0.3, 0.1, 0, 50), f64::INFINITY);
    }

    #[test]
    fn naive_hand_example() {
        let trace = ArmTrace::from_rewards(vec![0.1, 0.2, 0.3, 0.4]);
        assert_abs_diff_eq!(stoch_estimate_naive(&trace, 2, 6), 0.6, epsilon = 1e-12);
        assert_eq!(stoch_estimate_naive(&trace, 0, 6), f64::INFINITY);
        assert_eq!(stoch_estimate_naive(&trace, 3, 6), f64::INFINITY);
    }

    #[test]
    fn naive_constant_rewards() {
        let trace = ArmTrace::from_rewards(vec![0.5; 9]);
        for h in 1..=4 {
            for t in 9..30 {
                assert_eq!(stoch_estimate_naive(&trace, h, t), 0.5);
            }
        }
    }

    #[test]
    fn bonus_cases() {
        let b = bonus(1.0, 4, 2, 10, 0.01).unwrap();
        assert_abs_diff_eq!(b, 7.0 * (10.0 * 100f64.ln() / 8.0).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(b, 16.795, epsilon = 5e-4);
        assert_eq!(bonus(0.0, 4, 2, 10, 0.01).unwrap(), 0.0);
        assert_eq!(bonus(1.0, 4, 0, 10, 0.01).unwrap(), f64::INFINITY);
        assert!(bonus(1.0, 4, 2, 10, 1.0).is_err());
    }

    #[test]
    fn schedule_floor() {
        let w = WindowSchedule::new(0.25).unwrap();
        assert_eq!(w.width(3), 0);
        assert_eq!(w.width(4), 1);
        assert_eq!(w.width(11), 2);
        assert!(WindowSchedule::new(0.5).is_err());
        assert!(WindowSchedule::new(0.0).is_err());
    }

    #[test]
    fn incremental_tracks_naive_on_a_ramp() {
        let w = WindowSchedule::new(0.25).unwrap();
        let mut trace = ArmTrace::new();
        let mut acc = IncrementalAccumulators::new();
        for n in 1..=200 {
            trace.push(n as f64 / 200.0, n);
            acc.push(&trace, w.width(n)).unwrap();
            for t in [n, n + 1, n + 37] {
                let naive = stoch_estimate_naive(&trace, w.width(n), t);
                let fast = acc.query(t);
                assert!(
                    top_diff(fast, naive).abs() <= 1e-12 * naive.abs().max(1.0),
                    "n={n} t={t}"
                );
            }
        }
    }

    #[test]
    fn incremental_rejects_jumps() {
        let mut trace = ArmTrace::from_rewards(vec![0.1, 0.2, 0.3]);
        let mut acc = IncrementalAccumulators::new();
        let only_first = ArmTrace::from_rewards(vec![0.1]);
        acc.push(&only_first, 0).unwrap();
        // skipping a pull
        assert!(matches!(acc.push(&trace, 0), Err(Error::Contract(_))));
        trace = ArmTrace::from_rewards(vec![0.1, 0.2]);
        acc.push(&trace, 1).unwrap();
        trace.push(0.3, 3);
        assert!(matches!(acc.push(&trace, 3), Err(Error::Contract(_))));
        assert!(matches!(acc.push(&trace, 0), Err(Error::Contract(_))));
    }

    #[test]
    fn top_arithmetic() {
        assert_eq!(top_diff(f64::INFINITY, f64::INFINITY), 0.0);
        assert_eq!(top_diff(f64::INFINITY, 1.0), f64::INFINITY);
        assert_eq!(top_diff(2.0, 0.5), 1.5);
    }
}
