//! Instance generators: the two-instance constructions behind the regret
//! lower bounds, a seeded random rising family and a two-arm crossing
//! instance.

use serde::{Deserialize, Serialize};

use crate::curve::{CurveKind, RandomCurveParams, RewardCurve};
use crate::error::{domain, Result};
use crate::instance::{Arm, BanditInstance, InstancePair};
use crate::noise::{mix64, NoiseModel};

fn mean_over(curve: &RewardCurve, horizon: usize) -> f64 {
    (1..=horizon).map(|n| curve.mean(n)).sum::<f64>() / horizon as f64
}

/// Largest `n` with `n·slope ≤ cap` under floating-point evaluation.
fn last_unclipped(slope: f64, cap: f64) -> usize {
    let mut n = (cap / slope).floor() as usize;
    while ((n + 1) as f64) * slope <= cap {
        n += 1;
    }
    while n > 0 && (n as f64) * slope > cap {
        n -= 1;
    }
    n
}

/// Pair of two-arm instances sharing a constant arm `c` and differing in the
/// ramp of arm 2. `c` is placed halfway between the two arm-2 averages so the
/// average gap `Δ̄` is the same in both members.
fn constant_vs_ramps(
    label: &str,
    horizon: usize,
    ramp_a: RewardCurve,
    ramp_b: RewardCurve,
    indistinguishable_until: usize,
    noise: NoiseModel,
) -> Result<InstancePair> {
    let avg_a = mean_over(&ramp_a, horizon);
    let avg_b = mean_over(&ramp_b, horizon);
    let c = avg_a.min(avg_b) + (avg_a - avg_b).abs() / 2.0;
    let constant = RewardCurve::constant(c)?;
    let a =
        BanditInstance::from_curves(format!("{label}_a"), vec![constant.clone(), ramp_a], noise)?;
    let b = BanditInstance::from_curves(format!("{label}_b"), vec![constant, ramp_b], noise)?;
    Ok(InstancePair {
        a,
        b,
        indistinguishable_until,
    })
}

/// Non-concave pair: arm 2 of `A` jumps from 0 to `gamma_max` after
/// `⌊T/3⌋` pulls, arm 2 of `B` stays at 0; arm 1 is `gamma_max/2` in both.
pub fn make_pair_thm2(horizon: usize, gamma_max: f64) -> Result<InstancePair> {
    if horizon < 3 {
        return domain("horizon must be at least 3");
    }
    if !(gamma_max > 0.0 && gamma_max <= 1.0) {
        return domain(format!("gamma_max = {gamma_max} outside (0, 1]"));
    }
    let third = horizon / 3;
    let half = RewardCurve::constant(gamma_max / 2.0)?;
    let a = BanditInstance::from_curves(
        "thm2_a",
        vec![
            half.clone(),
            RewardCurve::piecewise_step(third, 0.0, gamma_max)?,
        ],
        NoiseModel::None,
    )?;
    let b = BanditInstance::from_curves(
        "thm2_b",
        vec![half, RewardCurve::constant(0.0)?],
        NoiseModel::None,
    )?;
    Ok(InstancePair {
        a,
        b,
        indistinguishable_until: third,
    })
}

/// Concave linear pair: arm 2 is `min{n/T, 1/2}` in `A` and `n/T` in `B`.
pub fn make_pair_thm3(horizon: usize) -> Result<InstancePair> {
    if horizon < 4 || !horizon.is_multiple_of(2) {
        return domain(format!(
            "horizon must be even and at least 4, got {horizon}"
        ));
    }
    let slope = 1.0 / horizon as f64;
    let half = horizon / 2;
    let ramp_a = RewardCurve::linear_ramp(slope, half as f64 * slope)?;
    let ramp_b = RewardCurve::linear_ramp(slope, 1.0)?;
    constant_vs_ramps("thm3", horizon, ramp_a, ramp_b, half, NoiseModel::None)
}

/// Snaps `x` to the nearest integer when it is within rounding noise of it.
pub(crate) fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.max(1.0) {
        r
    } else {
        x
    }
}

/// `⌊T^β⌋`, robust to `T^β` landing one ulp below an integer.
pub fn floor_power(horizon: usize, beta: f64) -> usize {
    snap((horizon as f64).powf(beta)).floor() as usize
}

/// `⌈T^β⌉`, robust to `T^β` landing one ulp above an integer.
pub fn ceil_power(horizon: usize, beta: f64) -> usize {
    snap((horizon as f64).powf(beta)).ceil() as usize
}

fn cor1_pair(label: &str, horizon: usize, beta: f64, noise: NoiseModel) -> Result<InstancePair> {
    if !(0.0..1.0).contains(&beta) {
        return domain(format!("beta = {beta} outside [0, 1)"));
    }
    if horizon < 2 {
        return domain("horizon must be at least 2");
    }
    let k = floor_power(horizon, beta);
    if 2 * k > horizon {
        return domain(format!("floor(T^beta) = {k} exceeds T/2"));
    }
    let slope = 1.0 / horizon as f64;
    let ramp_a = RewardCurve::linear_ramp(slope, k as f64 * slope)?;
    let ramp_b = RewardCurve::linear_ramp(slope, 1.0)?;
    constant_vs_ramps(label, horizon, ramp_a, ramp_b, k, noise)
}

/// Like [`make_pair_thm3`] but arm 2 of `A` saturates at `⌊T^β⌋/T`.
pub fn make_pair_cor1(horizon: usize, beta: f64) -> Result<InstancePair> {
    cor1_pair("cor1", horizon, beta, NoiseModel::None)
}

/// The [`make_pair_cor1`] curves with unit-variance Gaussian rewards.
pub fn make_pair_thm4(horizon: usize, beta: f64) -> Result<InstancePair> {
    cor1_pair("thm4", horizon, beta, NoiseModel::Gaussian { sigma: 1.0 })
}

/// `Υ`-dependent pair: arm 2 is `n/T` in `A` and `min{n/T, b}` in `B` with
/// `b = Ῡ / (2T^{1−q})`.
pub fn make_pair_thm5(horizon: usize, q: f64, upsilon_target: f64) -> Result<InstancePair> {
    if horizon < 2 {
        return domain("horizon must be at least 2");
    }
    if !(0.0..=1.0).contains(&q) {
        return domain(format!("q = {q} outside [0, 1]"));
    }
    if upsilon_target.is_nan() || upsilon_target < 0.0 {
        return domain("upsilon target must be non-negative");
    }
    let b = upsilon_target / (2.0 * (horizon as f64).powf(1.0 - q));
    if b > 0.5 {
        return domain(format!("b = {b} exceeds 1/2"));
    }
    let slope = 1.0 / horizon as f64;
    let ramp_a = RewardCurve::linear_ramp(slope, 1.0)?;
    let ramp_b = RewardCurve::linear_ramp(slope, b)?;
    let until = last_unclipped(slope, b);
    constant_vs_ramps("thm5", horizon, ramp_a, ramp_b, until, NoiseModel::None)
}

/// Parameters of [`make_random_rising`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomInstanceParams {
    #[serde(default)]
    pub curve: RandomCurveParams,
    #[serde(default = "bernoulli")]
    pub noise: NoiseModel,
}

fn bernoulli() -> NoiseModel {
    NoiseModel::Bernoulli
}

impl Default for RandomInstanceParams {
    fn default() -> Self {
        Self {
            curve: RandomCurveParams::default(),
            noise: NoiseModel::Bernoulli,
        }
    }
}

/// `K` seeded random concave curves; arm `i` uses a seed derived from `(seed, i)`.
pub fn make_random_rising(
    num_arms: usize,
    seed: u64,
    params: &RandomInstanceParams,
) -> Result<BanditInstance> {
    if num_arms == 0 {
        return domain("an instance needs at least one arm");
    }
    let arms = (0..num_arms)
        .map(|i| {
            let curve_seed = mix64(mix64(seed) ^ i as u64);
            let curve = RewardCurve::new(CurveKind::RandomConcave {
                seed: curve_seed,
                params: params.curve,
            })?;
            Ok(Arm::new(curve, params.noise))
        })
        .collect::<Result<Vec<_>>>()?;
    BanditInstance::new(format!("random{num_arms}_s{seed}"), arms)
}

/// Shape of [`make_crossing_pair_instance`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossingParams {
    /// Fraction of the horizon after which arm 1 saturates.
    pub cross_frac: f64,
    /// Plateau of the fast arm.
    pub fast_plateau: f64,
    /// Plateau of the slow arm.
    pub slow_plateau: f64,
}

impl Default for CrossingParams {
    fn default() -> Self {
        Self {
            cross_frac: 0.1,
            fast_plateau: 0.4,
            slow_plateau: 0.9,
        }
    }
}

/// Two-arm Bernoulli instance: a fast arm `min{n/(fT), m₁}` and a slow arm
/// `min{n/T, m₂}` with `m₂ > m₁`. The slow arm is the better constant choice
/// only once it can be pulled a linear number of times.
pub fn make_crossing_pair_instance(
    horizon: usize,
    params: &CrossingParams,
) -> Result<BanditInstance> {
    let CrossingParams {
        cross_frac,
        fast_plateau,
        slow_plateau,
    } = *params;
    if !(cross_frac > 0.0 && cross_frac < 0.5) {
        return domain(format!("cross_frac = {cross_frac} outside (0, 1/2)"));
    }
    if horizon == 0 {
        return domain("horizon must be at least 1");
    }
    if !(fast_plateau > 0.0 && fast_plateau < slow_plateau && slow_plateau <= 1.0) {
        return domain("plateaus must satisfy 0 < fast < slow <= 1");
    }
    let fast = RewardCurve::linear_ramp(1.0 / (cross_frac * horizon as f64), fast_plateau)?;
    let slow = RewardCurve::linear_ramp(1.0 / horizon as f64, slow_plateau)?;
    BanditInstance::from_curves("crossing", vec![fast, slow], NoiseModel::Bernoulli)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn thm2_shape() {
        let p = make_pair_thm2(12, 1.0).unwrap();
        // the step comes after ⌊12/3⌋ = 4 pulls
        assert_eq!(p.a.arms[1].curve.mean(4), 0.0);
        assert_eq!(p.a.arms[1].curve.mean(5), 1.0);
        assert_eq!(p.indistinguishable_until, 4);
        assert_eq!(p.first_disagreement(), None);
        let half = make_pair_thm2(12, 0.5).unwrap();
        assert_eq!(half.a.arms[0].curve.mean(1), 0.25);
        assert!(make_pair_thm2(12, 1.5).is_err());
    }

    #[test]
    fn thm3_values() {
        let p = make_pair_thm3(100).unwrap();
        let t = 100.0;
        let a = p.a.average_reward_and_gap(100).unwrap();
        let b = p.b.average_reward_and_gap(100).unwrap();
        assert_abs_diff_eq!(a.means[1], 3.0 / 8.0 + 1.0 / (4.0 * t), epsilon = 1e-12);
        assert_abs_diff_eq!(b.means[1], 0.5 + 1.0 / (2.0 * t), epsilon = 1e-12);
        assert_abs_diff_eq!(a.gaps[1], 0.06375, epsilon = 1e-12);
        assert_abs_diff_eq!(b.gaps[0], 0.06375, epsilon = 1e-12);
        assert_abs_diff_eq!(p.a.arms[0].curve.mean(1), 0.44125, epsilon = 1e-12);
        assert_eq!(a.oracle_arm, 0);
        assert_eq!(b.oracle_arm, 1);
        assert_eq!(p.indistinguishable_until, 50);
        assert_eq!(p.first_disagreement(), None);
        assert_ne!(p.a.arms[1].curve.mean(51), p.b.arms[1].curve.mean(51));
    }

    #[test]
    fn thm3_rejects_odd_horizon() {
        assert!(make_pair_thm3(101).is_err());
        assert!(make_pair_thm3(2).is_err());
    }

    #[test]
    fn cor1_shape() {
        let p = make_pair_cor1(10_000, 0.5).unwrap();
        assert_eq!(p.indistinguishable_until, 100);
        assert_eq!(p.first_disagreement(), None);
        let gap = p.a.average_reward_and_gap(10_000).unwrap().gaps[1];
        assert!(gap >= 1.0 / 16.0);
        let z = make_pair_cor1(1000, 0.0).unwrap();
        assert_eq!(z.indistinguishable_until, 1);
        assert_eq!(z.a.arms[1].curve.mean(1), 1.0 / 1000.0);
        assert_eq!(z.a.arms[1].curve.mean(500), 1.0 / 1000.0);
        // floor(8^0.5) = 2 > 4/2 fails only for tiny T: 3^0.99 -> 2 > 1
        assert!(make_pair_cor1(3, 0.99).is_err());
    }

    #[test]
    fn thm4_noise_and_distinguishability() {
        let p = make_pair_thm4(1000, 0.0).unwrap();
        assert!(p
            .a
            .arms
            .iter()
            .all(|a| a.noise == NoiseModel::Gaussian { sigma: 1.0 }));
        assert_eq!(p.a.arms[1].curve.mean(1), p.b.arms[1].curve.mean(1));
        assert_ne!(p.a.arms[1].curve.mean(2), p.b.arms[1].curve.mean(2));
    }

    #[test]
    fn thm5_upsilon_values() {
        let (t, q, target) = (1000usize, 0.5, 10.0);
        let p = make_pair_thm5(t, q, target).unwrap();
        let tf = t as f64;
        let b = target / (2.0 * tf.powf(1.0 - q));
        // the sum runs over l = 1..T-1, one term fewer than the closed forms
        let ua = p.a.cumulative_increment(t, q).unwrap();
        assert_abs_diff_eq!(ua, (tf - 1.0) * tf.powf(-q), epsilon = 1e-9);
        assert!((ua - tf.powf(1.0 - q)).abs() <= tf.powf(-q) + 1e-12);
        let ub = p.b.cumulative_increment(t, q).unwrap();
        assert!((ub - b * tf.powf(1.0 - q)).abs() <= tf.powf(-q) + 1e-12);
        assert!((ub - target / 2.0).abs() <= tf.powf(-q) + 1e-12);
        assert_eq!(p.first_disagreement(), None);
        assert_eq!(p.indistinguishable_until, (b * tf) as usize);
        let avg_a = p.a.average_reward_and_gap(t).unwrap();
        let avg_b = p.b.average_reward_and_gap(t).unwrap();
        let two_gap = avg_a.means[1] - avg_b.means[1];
        assert!(two_gap >= 1.0 / (4.0 * tf));
        assert_abs_diff_eq!(avg_a.gaps[0], two_gap / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(avg_b.gaps[1], two_gap / 2.0, epsilon = 1e-12);
        assert!(make_pair_thm5(100, 1.0, 2.0).is_err());
    }

    #[test]
    fn random_rising_is_deterministic_and_labelled() {
        let p = RandomInstanceParams::default();
        let x = make_random_rising(15, 0, &p).unwrap();
        let y = make_random_rising(15, 0, &p).unwrap();
        assert_eq!(x, y);
        let mut labels: Vec<String> = x.arms.iter().map(|a| a.curve.to_string()).collect();
        labels.sort();
        labels.dedup();
        assert_eq!(labels.len(), 15);
        assert_ne!(x, make_random_rising(15, 1, &p).unwrap());
    }

    #[test]
    fn crossing_oracle_flips_with_horizon() {
        let t = 20_000;
        let inst = make_crossing_pair_instance(t, &CrossingParams::default()).unwrap();
        assert_eq!(inst.oracle_constant_arm(t).unwrap(), 1);
        assert_eq!(inst.oracle_constant_arm(t / 100).unwrap(), 0);
        assert!(inst.is_rising_on(t));
        let bad = CrossingParams {
            fast_plateau: 0.95,
            slow_plateau: 0.9,
            ..Default::default()
        };
        assert!(make_crossing_pair_instance(t, &bad).is_err());
        let over = CrossingParams {
            slow_plateau: 1.2,
            ..Default::default()
        };
        assert!(make_crossing_pair_instance(t, &over).is_err());
    }
}
