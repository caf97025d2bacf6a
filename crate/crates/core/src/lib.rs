//! Simulation library for stochastic rising rested bandits.
//!
//! Arms are rested: the expected reward `μ_i(n)` of arm `i` depends only on
//! how many times `n` it has been pulled (1-based). Rising arms have
//! non-decreasing, concave mean curves.

pub mod builders;
pub mod curve;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod instance;
pub mod lower_bound;
pub mod noise;
pub mod policy;
pub mod rates;

pub use curve::{CurveKind, RandomCurveParams, RewardCurve};
pub use error::{Error, Result};
pub use harness::{run_many, run_one, ExperimentReport, RunRecord};
pub use instance::{Arm, AverageRewards, BanditInstance, InstancePair};
pub use lower_bound::LowerBound;
pub use noise::{NoiseKey, NoiseModel};
pub use policy::{Policy, PolicyConfig, PolicyContext};
