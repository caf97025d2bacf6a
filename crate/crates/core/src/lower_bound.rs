//! Regret floors of the two-instance constructions and their verification.

use serde::{Deserialize, Serialize};

use crate::builders::{
    make_pair_cor1, make_pair_thm2, make_pair_thm3, make_pair_thm4, make_pair_thm5, snap,
};
use crate::error::Result;
use crate::harness::{lb_pair_experiment, PairOutcome};
use crate::instance::InstancePair;
use crate::policy::PolicyConfig;

/// A lower-bound construction with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "theorem", rename_all = "snake_case")]
pub enum LowerBound {
    /// Non-concave step pair, floor `⌊γ_max T/12⌋`.
    Thm2 { gamma_max: f64 },
    /// Concave linear pair, floor `⌊T/64⌋`.
    Thm3,
    /// Pair indistinguishable for `⌊T^β⌋` pulls, floor `⌊T^β/32⌋`.
    Cor1 { beta: f64 },
    /// Gaussian version of `Cor1`, floor `⌊T^β + T^{2/3}⌋/(64√e)`.
    Thm4 { beta: f64 },
    /// `Υ`-dependent pair, floor on `max R/Υ(T, q)` of `T^q/8`.
    Thm5 { q: f64, upsilon: f64 },
}

/// Measured statistic against the floor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FloorCheck {
    pub outcome: PairOutcome,
    /// `sup_regret`, or `max R/Υ` for the `Υ`-dependent pair.
    pub statistic: f64,
    pub floor: f64,
    pub holds: bool,
}

impl LowerBound {
    pub fn name(&self) -> &'static str {
        match self {
            LowerBound::Thm2 { .. } => "thm2",
            LowerBound::Thm3 => "thm3",
            LowerBound::Cor1 { .. } => "cor1",
            LowerBound::Thm4 { .. } => "thm4",
            LowerBound::Thm5 { .. } => "thm5",
        }
    }

    pub fn pair(&self, horizon: usize) -> Result<InstancePair> {
        match *self {
            LowerBound::Thm2 { gamma_max } => make_pair_thm2(horizon, gamma_max),
            LowerBound::Thm3 => make_pair_thm3(horizon),
            LowerBound::Cor1 { beta } => make_pair_cor1(horizon, beta),
            LowerBound::Thm4 { beta } => make_pair_thm4(horizon, beta),
            LowerBound::Thm5 { q, upsilon } => make_pair_thm5(horizon, q, upsilon),
        }
    }

    pub fn floor(&self, horizon: usize) -> f64 {
        let t = horizon as f64;
        match *self {
            LowerBound::Thm2 { gamma_max } => (gamma_max * t / 12.0).floor(),
            LowerBound::Thm3 => (t / 64.0).floor(),
            LowerBound::Cor1 { beta } => snap(t.powf(beta) / 32.0).floor(),
            LowerBound::Thm4 { beta } => {
                snap(t.powf(beta) + t.powf(2.0 / 3.0)).floor() / (64.0 * 1f64.exp().sqrt())
            }
            LowerBound::Thm5 { q, .. } => t.powf(q) / 8.0,
        }
    }

    /// Runs `config` on both members and compares with the floor.
    pub fn verify(
        &self,
        config: &PolicyConfig,
        horizon: usize,
        runs: usize,
        base_seed: u64,
        workers: usize,
    ) -> Result<FloorCheck> {
        let pair = self.pair(horizon)?;
        let outcome = lb_pair_experiment(&pair, config, horizon, runs, base_seed, workers)?;
        let statistic = match *self {
            LowerBound::Thm5 { q, .. } => {
                let ratio = |r: f64, ups: f64| if ups > 0.0 { r / ups } else { f64::INFINITY };
                let ua = pair.a.cumulative_increment(horizon, q)?;
                let ub = pair.b.cumulative_increment(horizon, q)?;
                ratio(outcome.regret_a, ua).max(ratio(outcome.regret_b, ub))
            }
            _ => outcome.sup_regret,
        };
        let floor = self.floor(horizon);
        Ok(FloorCheck {
            outcome,
            statistic,
            floor,
            holds: statistic >= floor,
        })
    }
}
