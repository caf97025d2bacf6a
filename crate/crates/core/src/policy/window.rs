use std::collections::VecDeque;

/// Per-arm reward statistics over the last `tau` rounds.
#[derive(Debug, Clone)]
pub struct SlidingWindow {
    tau: usize,
    history: VecDeque<(usize, f64)>,
    sums: Vec<f64>,
    counts: Vec<usize>,
}

impl SlidingWindow {
    pub fn new(num_arms: usize, tau: usize) -> Self {
        Self {
            tau,
            history: VecDeque::with_capacity(tau.min(1 << 20)),
            sums: vec![0.0; num_arms],
            counts: vec![0; num_arms],
        }
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn num_arms(&self) -> usize {
        self.counts.len()
    }

    /// Records one round and drops the round that left the window.
    pub fn push(&mut self, arm: usize, value: f64) {
        self.history.push_back((arm, value));
        self.sums[arm] += value;
        self.counts[arm] += 1;
        if self.history.len() > self.tau {
            let (old, v) = self.history.pop_front().expect("window is non-empty");
            self.counts[old] -= 1;
            // recompute instead of subtracting once the arm leaves the window,
            // so an absent arm has an exact zero sum
            if self.counts[old] == 0 {
                self.sums[old] = 0.0;
            } else {
                self.sums[old] -= v;
            }
        }
    }

    pub fn count(&self, arm: usize) -> usize {
        self.counts[arm]
    }

    pub fn sum(&self, arm: usize) -> f64 {
        self.sums[arm]
    }

    /// Windowed mean, `None` when the arm is absent.
    pub fn mean(&self, arm: usize) -> Option<f64> {
        match self.counts[arm] {
            0 => None,
            n => Some(self.sums[arm] / n as f64),
        }
    }

    pub fn clear(&mut self) {
        self.history.clear();
        self.sums.iter_mut().for_each(|s| *s = 0.0);
        self.counts.iter_mut().for_each(|c| *c = 0);
    }
}
