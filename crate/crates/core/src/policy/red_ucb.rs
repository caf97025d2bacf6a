use super::{select_argmax, Policy};
use crate::error::Result;
use crate::estimator::{
    bonus_from_log, det_estimate, ArmTrace, IncrementalAccumulators, WindowSchedule,
};

/// Optimistic index policy for noiseless rising arms: extrapolates the last
/// observed increment to the current round.
#[derive(Debug, Clone)]
pub struct RedUcbDet {
    last: Vec<[f64; 2]>,
    pulls: Vec<usize>,
    last_index: f64,
}

impl RedUcbDet {
    pub fn new(num_arms: usize) -> Self {
        Self {
            last: vec![[0.0; 2]; num_arms],
            pulls: vec![0; num_arms],
            last_index: f64::NAN,
        }
    }

    /// `μ(N) + (t − N)(μ(N) − μ(N−1))`, `+∞` below two pulls.
    pub fn index(&self, arm: usize, t: usize) -> f64 {
        let [prev, cur] = self.last[arm];
        det_estimate(cur, cur - prev, self.pulls[arm], t)
    }
}

impl Policy for RedUcbDet {
    fn name(&self) -> &'static str {
        "red_ucb_det"
    }

    fn reset(&mut self, _seed: u64) {
        *self = Self::new(self.pulls.len());
    }

    fn select(&mut self, t: usize) -> usize {
        let indices: Vec<f64> = (0..self.pulls.len()).map(|i| self.index(i, t)).collect();
        let arm = select_argmax(&indices);
        self.last_index = indices[arm];
        arm
    }

    fn update(&mut self, arm: usize, reward: f64, _t: usize) {
        self.last[arm] = [self.last[arm][1], reward];
        self.pulls[arm] += 1;
    }

    fn last_index(&self) -> Option<f64> {
        Some(self.last_index)
    }

    fn describe(&self) -> String {
        "red_ucb_det".into()
    }
}

/// Windowed optimistic estimator plus a confidence bonus at level
/// `δ_t = t^{−α}`; the estimate is maintained in `O(1)` per pull.
#[derive(Debug, Clone)]
pub struct RedUcb {
    schedule: WindowSchedule,
    alpha: f64,
    sigma: f64,
    traces: Vec<ArmTrace>,
    accs: Vec<IncrementalAccumulators>,
    last_index: f64,
}

impl RedUcb {
    pub fn new(num_arms: usize, epsilon: f64, alpha: f64, sigma: f64) -> Result<Self> {
        Ok(Self {
            schedule: WindowSchedule::new(epsilon)?,
            alpha,
            sigma,
            traces: vec![ArmTrace::new(); num_arms],
            accs: vec![IncrementalAccumulators::new(); num_arms],
            last_index: f64::NAN,
        })
    }

    pub fn index(&self, arm: usize, t: usize) -> f64 {
        let acc = &self.accs[arm];
        let h = acc.width();
        if h == 0 {
            return f64::INFINITY;
        }
        let log_inv_delta = self.alpha * (t as f64).ln();
        acc.query(t) + bonus_from_log(self.sigma, acc.pulls(), h, t, log_inv_delta)
    }

    pub fn trace(&self, arm: usize) -> &ArmTrace {
        &self.traces[arm]
    }
}

impl Policy for RedUcb {
    fn name(&self) -> &'static str {
        "red_ucb"
    }

    fn reset(&mut self, _seed: u64) {
        let k = self.traces.len();
        self.traces = vec![ArmTrace::new(); k];
        self.accs = vec![IncrementalAccumulators::new(); k];
        self.last_index = f64::NAN;
    }

    fn select(&mut self, t: usize) -> usize {
        let indices: Vec<f64> = (0..self.traces.len()).map(|i| self.index(i, t)).collect();
        let arm = select_argmax(&indices);
        self.last_index = indices[arm];
        arm
    }

    fn update(&mut self, arm: usize, reward: f64, t: usize) {
        let trace = &mut self.traces[arm];
        trace.push(reward, t);
        let h = self.schedule.width(trace.pulls());
        self.accs[arm]
            .push(trace, h)
            .expect("a floor schedule with epsilon < 1/2 grows by at most one per pull");
    }

    fn last_index(&self) -> Option<f64> {
        Some(self.last_index)
    }

    fn describe(&self) -> String {
        format!(
            "red_ucb epsilon={} alpha={} sigma={}",
            self.schedule.epsilon(),
            self.alpha,
            self.sigma
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::{bonus, stoch_estimate_naive};
    use approx::assert_abs_diff_eq;

    #[test]
    fn stochastic_index_composes_estimate_and_bonus() {
        // ⌊8/4⌋ = 2
        let mut p = RedUcb::new(1, 0.25, 2.0, 1.0).unwrap();
        let rewards = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8];
        for (i, r) in rewards.iter().enumerate() {
            p.update(0, *r, i + 1);
        }
        let t = 10;
        let est = stoch_estimate_naive(p.trace(0), 2, t);
        let b = bonus(1.0, 8, 2, t, (t as f64).powf(-2.0)).unwrap();
        assert_abs_diff_eq!(p.index(0, t), est + b, epsilon = 1e-12);
    }

    #[test]
    fn hand_trace_index() {
        // r = (0.1, 0.2, 0.3, 0.4), h = 2, t = 10: both extrapolations give 1.0
        let trace = ArmTrace::from_rewards(vec![0.1, 0.2, 0.3, 0.4]);
        let est = stoch_estimate_naive(&trace, 2, 10);
        let b = bonus(1.0, 4, 2, 10, 0.01).unwrap();
        assert_abs_diff_eq!(est, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(est + b, 17.795, epsilon = 5e-4);
    }

    #[test]
    fn forced_exploration_blocks() {
        let mut p = RedUcb::new(3, 0.25, 3.0, 0.0).unwrap();
        let mut seq = vec![];
        for t in 1..=12 {
            let a = p.select(t);
            seq.push(a);
            p.update(a, 0.5, t);
        }
        assert_eq!(seq, vec![0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2]);
    }

    #[test]
    fn deterministic_index() {
        let mut p = RedUcbDet::new(2);
        assert_eq!(p.select(1), 0);
        p.update(0, 0.1, 1);
        p.update(0, 0.2, 2);
        assert_abs_diff_eq!(p.index(0, 5), 0.5, epsilon = 1e-12);
        assert_eq!(p.index(1, 5), f64::INFINITY);
    }
}
