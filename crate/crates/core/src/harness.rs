//! Seeded Monte-Carlo runner, pseudo-regret accounting and aggregation.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{BanditInstance, InstancePair};
use crate::noise::{mix64, NoiseKey};
use crate::policy::{Policy, PolicyConfig, PolicyContext};

/// Salt separating the policy's random stream from the reward noise.
const POLICY_STREAM: u64 = 0xA5A5_0F0F_C3C3_9669;

/// One seeded trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub seed: u64,
    /// `I_t` for `t = 1..=T`, 0-based arm indices.
    pub arms: Vec<usize>,
    /// Pull index `N_{I_t,t}` at which each reward was drawn.
    pub pull_index: Vec<usize>,
    pub rewards: Vec<f64>,
    /// `μ_{I_t}(N_{I_t,t})`.
    pub expected: Vec<f64>,
    /// Cumulative pseudo-regret after each round.
    pub regret: Vec<f64>,
    /// `N_{i,T}`.
    pub pulls: Vec<usize>,
    /// Index of the chosen arm each round, for index policies.
    pub chosen_index: Option<Vec<f64>>,
}

impl RunRecord {
    pub fn final_regret(&self) -> f64 {
        self.regret.last().copied().unwrap_or(0.0)
    }
}

fn context(instance: &BanditInstance, horizon: usize) -> PolicyContext {
    PolicyContext {
        num_arms: instance.num_arms(),
        horizon,
        noise_scale: instance.noise_scale(),
        noiseless: instance.is_noiseless(),
    }
}

/// `μ_{i*}(t)` for `t = 1..=T`.
pub fn oracle_path(instance: &BanditInstance, horizon: usize) -> Result<Vec<f64>> {
    let star = instance.oracle_constant_arm(horizon)?;
    let curve = &instance.arms[star].curve;
    Ok((1..=horizon).map(|t| curve.mean(t)).collect())
}

fn check_horizon(instance: &BanditInstance, horizon: usize) -> Result<()> {
    if horizon < instance.num_arms() {
        return Err(Error::Domain(format!(
            "horizon {horizon} is shorter than the number of arms {}",
            instance.num_arms()
        )));
    }
    Ok(())
}

fn simulate(
    instance: &BanditInstance,
    policy: &mut dyn Policy,
    oracle: &[f64],
    seed: u64,
) -> RunRecord {
    let horizon = oracle.len();
    let k = instance.num_arms();
    policy.reset(mix64(seed ^ POLICY_STREAM));
    let mut pulls = vec![0usize; k];
    let mut rec = RunRecord {
        seed,
        arms: Vec::with_capacity(horizon),
        pull_index: Vec::with_capacity(horizon),
        rewards: Vec::with_capacity(horizon),
        expected: Vec::with_capacity(horizon),
        regret: Vec::with_capacity(horizon),
        pulls: vec![],
        chosen_index: None,
    };
    let mut indices = Vec::new();
    let mut cumulative = 0.0;
    for t in 1..=horizon {
        let arm = policy.select(t);
        assert!(arm < k, "{} selected arm {arm} of {k}", policy.name());
        if let Some(b) = policy.last_index() {
            indices.push(b);
        }
        pulls[arm] += 1;
        let n = pulls[arm];
        let chosen = &instance.arms[arm];
        let mean = chosen.curve.mean(n);
        let reward = chosen.noise.sample(mean, NoiseKey::new(seed, t, arm, n));
        policy.update(arm, reward, t);
        cumulative += oracle[t - 1] - mean;
        rec.arms.push(arm);
        rec.pull_index.push(n);
        rec.rewards.push(reward);
        rec.expected.push(mean);
        rec.regret.push(cumulative);
    }
    rec.pulls = pulls;
    if indices.len() == horizon {
        rec.chosen_index = Some(indices);
    }
    rec
}

/// One trajectory of `config` on `instance` over `T` rounds.
pub fn run_one(
    instance: &BanditInstance,
    config: &PolicyConfig,
    horizon: usize,
    seed: u64,
) -> Result<RunRecord> {
    check_horizon(instance, horizon)?;
    let mut policy = config.build(&context(instance, horizon))?;
    let oracle = oracle_path(instance, horizon)?;
    Ok(simulate(instance, policy.as_mut(), &oracle, seed))
}

/// Runs with seeds `base_seed + i`, `i < runs`, on `workers` threads.
/// The output order is the run order whatever the thread count.
pub fn run_records(
    instance: &BanditInstance,
    config: &PolicyConfig,
    horizon: usize,
    runs: usize,
    base_seed: u64,
    workers: usize,
) -> Result<Vec<RunRecord>> {
    if runs == 0 {
        return Err(Error::Domain("runs must be at least 1".into()));
    }
    check_horizon(instance, horizon)?;
    let ctx = context(instance, horizon);
    // surface configuration errors before spawning threads
    config.build(&ctx)?;
    let oracle = oracle_path(instance, horizon)?;
    let job = |i: usize| -> RunRecord {
        let mut policy = config.build(&ctx).expect("configuration validated above");
        simulate(
            instance,
            policy.as_mut(),
            &oracle,
            base_seed.wrapping_add(i as u64),
        )
    };
    if workers <= 1 {
        return Ok((0..runs).map(job).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(|| (0..runs).into_par_iter().map(job).collect()))
}

/// Aggregated Monte-Carlo statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub instance: String,
    pub policy: String,
    pub policy_params: String,
    pub horizon: usize,
    pub runs: usize,
    pub base_seed: u64,
    /// Mean cumulative pseudo-regret after each round.
    pub mean_regret: Vec<f64>,
    /// 95% normal-approximation half-width, `1.96·sd/√runs`.
    pub ci_half: Vec<f64>,
    pub mean_pulls: Vec<f64>,
    pub final_regrets: Vec<f64>,
}

/// Sample mean and `1.96·sd/√n` (zero for a single sample).
pub fn mean_and_ci(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, 1.96 * (var / n).sqrt())
}

impl ExperimentReport {
    pub fn from_records(
        instance: &BanditInstance,
        config: &PolicyConfig,
        records: &[RunRecord],
        base_seed: u64,
    ) -> Result<Self> {
        let first = records
            .first()
            .ok_or_else(|| Error::Domain("no runs to aggregate".into()))?;
        let horizon = first.regret.len();
        let params = config.build(&context(instance, horizon))?.describe();
        let mut mean_regret = Vec::with_capacity(horizon);
        let mut ci_half = Vec::with_capacity(horizon);
        let mut column = vec![0.0; records.len()];
        for t in 0..horizon {
            for (slot, r) in column.iter_mut().zip(records) {
                *slot = r.regret[t];
            }
            let (m, ci) = mean_and_ci(&column);
            mean_regret.push(m);
            ci_half.push(ci);
        }
        let k = instance.num_arms();
        let mean_pulls = (0..k)
            .map(|i| records.iter().map(|r| r.pulls[i] as f64).sum::<f64>() / records.len() as f64)
            .collect();
        Ok(Self {
            instance: instance.label.clone(),
            policy: config.name().to_string(),
            policy_params: params,
            horizon,
            runs: records.len(),
            base_seed,
            mean_regret,
            ci_half,
            mean_pulls,
            final_regrets: records.iter().map(RunRecord::final_regret).collect(),
        })
    }

    pub fn final_mean_regret(&self) -> f64 {
        self.mean_regret.last().copied().unwrap_or(0.0)
    }

    pub fn final_ci_half(&self) -> f64 {
        self.ci_half.last().copied().unwrap_or(0.0)
    }
}

/// [`run_records`] followed by aggregation.
pub fn run_many(
    instance: &BanditInstance,
    config: &PolicyConfig,
    horizon: usize,
    runs: usize,
    base_seed: u64,
    workers: usize,
) -> Result<ExperimentReport> {
    let records = run_records(instance, config, horizon, runs, base_seed, workers)?;
    ExperimentReport::from_records(instance, config, &records, base_seed)
}

/// Both sides of the regret decomposition `R ≥ Σ Δ̄_i E[N_{i,T}]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecompositionReport {
    /// Mean pseudo-regret at `T`.
    pub lhs: f64,
    /// `Σ_i Δ̄_i · mean N_{i,T}`.
    pub rhs: f64,
    /// Three standard errors of the per-run difference.
    pub margin: f64,
    pub holds: bool,
}

/// Checks `lhs ≥ rhs − margin` on rising instances.
pub fn regret_decomposition_check(
    records: &[RunRecord],
    instance: &BanditInstance,
    horizon: usize,
) -> Result<DecompositionReport> {
    if records.is_empty() {
        return Err(Error::Domain("no runs to check".into()));
    }
    if !instance.is_rising_on(horizon) {
        return Err(Error::Domain(format!(
            "instance '{}' is not non-decreasing and concave on [1, {horizon}]",
            instance.label
        )));
    }
    let gaps = instance.average_reward_and_gap(horizon)?.gaps;
    let weighted =
        |r: &RunRecord| -> f64 { gaps.iter().zip(&r.pulls).map(|(g, n)| g * *n as f64).sum() };
    let n = records.len() as f64;
    let lhs = records.iter().map(RunRecord::final_regret).sum::<f64>() / n;
    let rhs = records.iter().map(weighted).sum::<f64>() / n;
    let diffs: Vec<f64> = records
        .iter()
        .map(|r| r.final_regret() - weighted(r))
        .collect();
    let margin = if records.len() < 2 {
        0.0
    } else {
        let mean = diffs.iter().sum::<f64>() / n;
        let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
        3.0 * (var / n).sqrt()
    };
    // both sides are sums of the same rounded terms on constant arms
    let slack = 1e-9 * rhs.abs().max(1.0);
    Ok(DecompositionReport {
        lhs,
        rhs,
        margin,
        holds: lhs >= rhs - margin - slack,
    })
}

/// Mean final regret on each member of a pair, with common random numbers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairOutcome {
    pub regret_a: f64,
    pub regret_b: f64,
    pub sup_regret: f64,
}

pub fn lb_pair_experiment(
    pair: &InstancePair,
    config: &PolicyConfig,
    horizon: usize,
    runs: usize,
    base_seed: u64,
    workers: usize,
) -> Result<PairOutcome> {
    let mean_final = |inst: &BanditInstance| -> Result<f64> {
        let recs = run_records(inst, config, horizon, runs, base_seed, workers)?;
        Ok(recs.iter().map(RunRecord::final_regret).sum::<f64>() / runs as f64)
    };
    let regret_a = mean_final(&pair.a)?;
    let regret_b = mean_final(&pair.b)?;
    Ok(PairOutcome {
        regret_a,
        regret_b,
        sup_regret: regret_a.max(regret_b),
    })
}

/// Least-squares slope of `ln R` against `ln T`; non-positive regrets are
/// skipped with a warning.
pub fn rate_fit(points: &[(usize, f64)]) -> Result<f64> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(t, r)| {
            let keep = *r > 0.0 && *t > 0;
            if !keep {
                log::warn!("rate fit skips T = {t} with regret {r}");
            }
            keep
        })
        .map(|(t, r)| ((*t as f64).ln(), r.ln()))
        .collect();
    if usable.len() < 2 {
        return Err(Error::Domain("rate fit needs two positive points".into()));
    }
    let n = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / n;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = usable.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = usable.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("rate fit needs distinct horizons".into()));
    }
    Ok(sxy / sxx)
}

/// Slope of the mean regret curve over the final `fraction` of rounds.
pub fn tail_slope(curve: &[f64], fraction: f64) -> f64 {
    let len = curve.len();
    if len < 2 {
        return 0.0;
    }
    let span = ((len as f64 * fraction).round() as usize).clamp(1, len - 1);
    (curve[len - 1] - curve[len - 1 - span]) / span as f64
}

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// `{instance}_{policy}_{T}_{runs}.csv`.
pub fn regret_csv_name(report: &ExperimentReport) -> String {
    format!(
        "{}_{}_{}_{}.csv",
        report.instance, report.policy, report.horizon, report.runs
    )
}

pub fn pulls_csv_name(report: &ExperimentReport) -> String {
    format!(
        "{}_{}_{}_{}_pulls.csv",
        report.instance, report.policy, report.horizon, report.runs
    )
}

fn header(report: &ExperimentReport, extra: &[(&str, String)]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# instance: {}", report.instance);
    let _ = writeln!(out, "# policy: {}", report.policy_params);
    let _ = writeln!(out, "# horizon: {}", report.horizon);
    let _ = writeln!(out, "# runs: {}", report.runs);
    let _ = writeln!(out, "# base_seed: {}", report.base_seed);
    for (k, v) in extra {
        let _ = writeln!(out, "# {k}: {v}");
    }
    out
}

/// Regret table `t,mean_regret,ci_half,policy,instance,runs,seed`.
pub fn regret_csv(report: &ExperimentReport, extra: &[(&str, String)]) -> String {
    let mut out = header(report, extra);
    out.push_str("t,mean_regret,ci_half,policy,instance,runs,seed\n");
    for (i, (m, c)) in report.mean_regret.iter().zip(&report.ci_half).enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            i + 1,
            fmt_f64(*m),
            fmt_f64(*c),
            report.policy,
            report.instance,
            report.runs,
            report.base_seed
        );
    }
    out
}

/// Pull table `arm,mean_pulls,policy`.
pub fn pulls_csv(report: &ExperimentReport, extra: &[(&str, String)]) -> String {
    let mut out = header(report, extra);
    out.push_str("arm,mean_pulls,policy\n");
    for (i, p) in report.mean_pulls.iter().enumerate() {
        let _ = writeln!(out, "{i},{},{}", fmt_f64(*p), report.policy);
    }
    out
}

/// Writes both tables into `dir`; returns their paths.
pub fn write_report(
    report: &ExperimentReport,
    dir: &Path,
    extra: &[(&str, String)],
) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let regret = dir.join(regret_csv_name(report));
    let pulls = dir.join(pulls_csv_name(report));
    std::fs::write(&regret, regret_csv(report, extra))?;
    std::fs::write(&pulls, pulls_csv(report, extra))?;
    Ok((regret, pulls))
}
