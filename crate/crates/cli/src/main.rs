//! `rising`: run rising rested bandit experiments, check regret floors and
//! tabulate cumulative increments.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use rising_bandits::builders::{
    make_crossing_pair_instance, make_random_rising, CrossingParams, RandomInstanceParams,
};
use rising_bandits::harness::write_report;
use rising_bandits::policy::POLICY_NAMES;
use rising_bandits::rates::{upsilon_rate_bound, IncrementFamily};
use rising_bandits::{BanditInstance, Error, LowerBound, PolicyConfig};

#[derive(Parser, Debug)]
#[command(name = "rising", version, about = "Rising rested bandit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monte-Carlo regret of one or all policies; writes CSV tables.
    Run(RunArgs),
    /// Runs a policy on a lower-bound pair and checks the regret floor.
    LbVerify(LbArgs),
    /// Prints the cumulative increment of an instance for several exponents.
    Upsilon(UpsilonArgs),
    /// Lists policies and builtin instances.
    List,
}

#[derive(Args, Debug, Clone)]
struct InstanceArgs {
    /// Builtin instance: thm2_a, thm2_b, thm3_a, ..., thm5_b, crossing, random.
    #[arg(long, conflicts_with = "instance_file")]
    instance: Option<String>,
    /// Instance JSON file.
    #[arg(long)]
    instance_file: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    gamma_max: f64,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    /// Exponent of the Υ-dependent pair.
    #[arg(long = "pair-q", default_value_t = 0.5)]
    pair_q: f64,
    #[arg(long = "pair-upsilon", default_value_t = 1.0)]
    pair_upsilon: f64,
    /// Arms of the random instance.
    #[arg(long, default_value_t = 5)]
    arms: usize,
    /// Seed of the random instance's curves.
    #[arg(long, default_value_t = 0)]
    instance_seed: u64,
}

#[derive(Args, Debug, Clone, Default)]
struct PolicyOverrides {
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Noise scale used by the confidence bonus.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    v_t: Option<f64>,
    #[arg(long)]
    delta_t: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    /// KL exploration constant (klucb, sw_klucb).
    #[arg(long)]
    c: Option<f64>,
    /// Sliding-window length (sw_ucb, sw_klucb, sw_ts).
    #[arg(long)]
    tau: Option<usize>,
    #[arg(long)]
    xi: Option<f64>,
    /// Window exponent of sw_ts.
    #[arg(long = "ts-beta")]
    ts_beta: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Exploration probability of ser4.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    switches: Option<f64>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Policy name or `all`.
    #[arg(long)]
    policy: Option<String>,
    #[arg(short = 'T', long = "horizon")]
    horizon: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON experiment file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: PolicyOverrides,
}

#[derive(Args, Debug)]
struct LbArgs {
    #[arg(long, value_enum)]
    theorem: Theorem,
    #[arg(long, default_value = "red_ucb")]
    policy: String,
    #[arg(short = 'T', long = "horizon")]
    horizon: usize,
    #[arg(long, default_value_t = 1)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = 1.0)]
    gamma_max: f64,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    #[arg(long, default_value_t = 0.5)]
    q: f64,
    #[arg(long, default_value_t = 1.0)]
    upsilon: f64,
    #[command(flatten)]
    overrides: PolicyOverrides,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Theorem {
    Thm2,
    Thm3,
    Cor1,
    Thm4,
    Thm5,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Family {
    Poly,
    Exp,
}

#[derive(Args, Debug)]
struct UpsilonArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(short = 'T', long = "horizon")]
    horizon: usize,
    /// Exponents to tabulate.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.25, 0.5, 1.0])]
    q: Vec<f64>,
    /// Increment family for the closed-form bound column.
    #[arg(long, value_enum, requires = "rate")]
    family: Option<Family>,
    #[arg(long)]
    rate: Option<f64>,
    /// Scale of the dominating increment profile.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
}

/// Experiment file for `run`.
#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct RunFile {
    instance: Option<String>,
    instance_file: Option<PathBuf>,
    policy: Option<String>,
    /// Per-policy parameter objects, e.g. `{"name": "red_ucb", "epsilon": 0.125}`.
    #[serde(default)]
    policies: Vec<PolicyConfig>,
    horizon: Option<usize>,
    runs: Option<usize>,
    seed: Option<u64>,
    workers: Option<usize>,
    out: Option<PathBuf>,
}

/// Marks failures caused by bad input rather than by the run itself.
#[derive(Debug)]
struct Precondition(String);

impl std::fmt::Display for Precondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Precondition {}

fn precondition(err: Error) -> anyhow::Error {
    match err {
        Error::Io(_) => anyhow::Error::new(err),
        other => anyhow::Error::new(Precondition(other.to_string())),
    }
}

fn bad_input(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(Precondition(msg.into()))
}

fn builtin_instance(
    name: &str,
    args: &InstanceArgs,
    horizon: usize,
) -> anyhow::Result<BanditInstance> {
    let pair = |bound: LowerBound| bound.pair(horizon).map_err(precondition);
    let member = |bound: LowerBound, side: &str| -> anyhow::Result<BanditInstance> {
        let p = pair(bound)?;
        Ok(if side == "a" { p.a } else { p.b })
    };
    let (stem, side) = match name.rsplit_once('_') {
        Some((stem, side)) if side == "a" || side == "b" => (stem, side),
        _ => (name, ""),
    };
    match (stem, side) {
        ("thm2", s) if !s.is_empty() => member(
            LowerBound::Thm2 {
                gamma_max: args.gamma_max,
            },
            s,
        ),
        ("thm3", s) if !s.is_empty() => member(LowerBound::Thm3, s),
        ("cor1", s) if !s.is_empty() => member(LowerBound::Cor1 { beta: args.beta }, s),
        ("thm4", s) if !s.is_empty() => member(LowerBound::Thm4 { beta: args.beta }, s),
        ("thm5", s) if !s.is_empty() => member(
            LowerBound::Thm5 {
                q: args.pair_q,
                upsilon: args.pair_upsilon,
            },
            s,
        ),
        ("crossing", "") => {
            make_crossing_pair_instance(horizon, &CrossingParams::default()).map_err(precondition)
        }
        ("random", "") => make_random_rising(
            args.arms,
            args.instance_seed,
            &RandomInstanceParams::default(),
        )
        .map_err(precondition),
        _ => Err(bad_input(format!("unknown instance '{name}'"))),
    }
}

fn load_instance(
    name: Option<&str>,
    file: Option<&Path>,
    args: &InstanceArgs,
    horizon: usize,
) -> anyhow::Result<BanditInstance> {
    match (name, file) {
        (_, Some(path)) => BanditInstance::load(path).map_err(|e| match e {
            Error::Io(msg) => bad_input(format!("cannot read {}: {msg}", path.display())),
            other => precondition(other),
        }),
        (Some(name), None) => builtin_instance(name, args, horizon),
        (None, None) => Err(bad_input("give --instance or --instance-file")),
    }
}

fn set<T: Copy>(slot: &mut Option<T>, value: Option<T>) {
    if value.is_some() {
        *slot = value;
    }
}

/// Applies the flags that belong to `cfg`'s policy; other flags are ignored.
fn apply_overrides(mut cfg: PolicyConfig, o: &PolicyOverrides) -> PolicyConfig {
    match &mut cfg {
        PolicyConfig::RedUcbDet => {}
        PolicyConfig::RedUcb {
            epsilon,
            alpha,
            sigma,
        } => {
            set(epsilon, o.epsilon);
            set(alpha, o.alpha);
            set(sigma, o.sigma);
        }
        PolicyConfig::Rexp3 {
            v_t,
            delta_t,
            gamma,
        } => {
            set(v_t, o.v_t);
            set(delta_t, o.delta_t);
            set(gamma, o.gamma);
        }
        PolicyConfig::Klucb { c } => set(c, o.c),
        PolicyConfig::SwUcb { tau, xi } => {
            set(tau, o.tau);
            set(xi, o.xi);
        }
        PolicyConfig::SwKlucb { tau, c } => {
            set(tau, o.tau);
            set(c, o.c);
        }
        PolicyConfig::SwTs { tau, beta } => {
            set(tau, o.tau);
            set(beta, o.ts_beta);
        }
        PolicyConfig::Ser4 {
            delta,
            eps,
            phi,
            switches,
        } => {
            set(delta, o.delta);
            set(eps, o.eps);
            set(phi, o.phi);
            set(switches, o.switches);
        }
    }
    cfg
}

fn resolve_policies(
    selector: &str,
    from_file: &[PolicyConfig],
    overrides: &PolicyOverrides,
) -> anyhow::Result<Vec<PolicyConfig>> {
    let names: Vec<&str> = if selector == "all" {
        POLICY_NAMES.to_vec()
    } else {
        vec![selector]
    };
    names
        .into_iter()
        .map(|name| {
            let base = match from_file.iter().find(|c| c.name() == name) {
                Some(c) => c.clone(),
                None => PolicyConfig::from_name(name).map_err(precondition)?,
            };
            let cfg = apply_overrides(base, overrides);
            cfg.validate().map_err(precondition)?;
            Ok(cfg)
        })
        .collect()
}

fn cmd_run(args: RunArgs) -> anyhow::Result<()> {
    let file: RunFile = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| bad_input(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| bad_input(format!("{}: {e}", path.display())))?
        }
        None => RunFile::default(),
    };
    let horizon = args
        .horizon
        .or(file.horizon)
        .ok_or_else(|| bad_input("give --horizon (-T)"))?;
    let runs = args.runs.or(file.runs).unwrap_or(1);
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let workers = args.workers.or(file.workers).unwrap_or(1);
    let out = args
        .out
        .clone()
        .or(file.out.clone())
        .unwrap_or_else(|| PathBuf::from("results"));
    if runs == 0 || workers == 0 {
        return Err(bad_input("--runs and --workers must be at least 1"));
    }
    // a flag-level instance choice replaces both file-level fields
    let (name, path) = if args.instance.instance.is_some() || args.instance.instance_file.is_some()
    {
        (
            args.instance.instance.clone(),
            args.instance.instance_file.clone(),
        )
    } else {
        (file.instance.clone(), file.instance_file.clone())
    };
    let instance = load_instance(name.as_deref(), path.as_deref(), &args.instance, horizon)?;
    let selector = args
        .policy
        .clone()
        .or(file.policy.clone())
        .unwrap_or_else(|| "red_ucb".into());
    let configs = resolve_policies(&selector, &file.policies, &args.overrides)?;

    for cfg in configs {
        if selector == "all" && cfg == PolicyConfig::RedUcbDet && !instance.is_noiseless() {
            log::warn!(
                "skipping red_ucb_det: instance '{}' is noisy",
                instance.label
            );
            continue;
        }
        log::info!(
            "running {} on {} (T = {horizon}, {runs} runs)",
            cfg.name(),
            instance.label
        );
        let report = rising_bandits::run_many(&instance, &cfg, horizon, runs, seed, workers)
            .map_err(precondition)?;
        let extra = [
            ("config", serde_json::to_string(&cfg)?),
            ("workers", workers.to_string()),
        ];
        let (regret, pulls) = write_report(&report, &out, &extra)
            .with_context(|| format!("writing results to {}", out.display()))?;
        println!(
            "{}\t{}\tfinal_regret={:.4}\tci_half={:.4}\t{}\t{}",
            report.policy,
            report.instance,
            report.final_mean_regret(),
            report.final_ci_half(),
            regret.display(),
            pulls.display()
        );
    }
    Ok(())
}

/// `Ok(true)` when the floor holds.
fn cmd_lb_verify(args: LbArgs) -> anyhow::Result<bool> {
    let bound = match args.theorem {
        Theorem::Thm2 => LowerBound::Thm2 {
            gamma_max: args.gamma_max,
        },
        Theorem::Thm3 => LowerBound::Thm3,
        Theorem::Cor1 => LowerBound::Cor1 { beta: args.beta },
        Theorem::Thm4 => LowerBound::Thm4 { beta: args.beta },
        Theorem::Thm5 => LowerBound::Thm5 {
            q: args.q,
            upsilon: args.upsilon,
        },
    };
    if args.runs == 0 || args.workers == 0 {
        return Err(bad_input("--runs and --workers must be at least 1"));
    }
    let cfg = resolve_policies(&args.policy, &[], &args.overrides)?;
    let cfg = cfg.first().context("no policy selected")?;
    let check = bound
        .verify(cfg, args.horizon, args.runs, args.seed, args.workers)
        .map_err(precondition)?;
    println!(
        "{} {} T={} runs={}: regret_a={:.4} regret_b={:.4} statistic={:.4} floor={:.4} {}",
        bound.name(),
        cfg.name(),
        args.horizon,
        args.runs,
        check.outcome.regret_a,
        check.outcome.regret_b,
        check.statistic,
        check.floor,
        if check.holds { "HOLDS" } else { "VIOLATED" }
    );
    Ok(check.holds)
}

fn cmd_upsilon(args: UpsilonArgs) -> anyhow::Result<()> {
    let inst = load_instance(
        args.instance.instance.as_deref(),
        args.instance.instance_file.as_deref(),
        &args.instance,
        args.horizon,
    )?;
    let family = match (args.family, args.rate) {
        (Some(Family::Poly), Some(c)) => Some(IncrementFamily::Poly { c }),
        (Some(Family::Exp), Some(c)) => Some(IncrementFamily::Exp { c }),
        _ => None,
    };
    println!("instance: {}  T: {}", inst.label, args.horizon);
    println!("q\tupsilon\tbound");
    for q in &args.q {
        let ups = inst
            .cumulative_increment(args.horizon, *q)
            .map_err(precondition)?;
        let bound = match family {
            Some(f) => format!(
                "{:.6e}",
                upsilon_rate_bound(f, args.scale, *q, args.horizon).map_err(precondition)?
            ),
            None => "-".into(),
        };
        println!("{q}\t{ups:.6e}\t{bound}");
    }
    println!("V_T\t{:.6e}", inst.total_variation(args.horizon));
    Ok(())
}

fn cmd_list() {
    println!("policies:");
    for name in POLICY_NAMES {
        println!("  {name}");
    }
    println!("instances:");
    for stem in ["thm2", "thm3", "cor1", "thm4", "thm5"] {
        println!("  {stem}_a  {stem}_b");
    }
    println!("  crossing");
    println!("  random");
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args).map(|_| true),
        Command::LbVerify(args) => cmd_lb_verify(args),
        Command::Upsilon(args) => cmd_upsilon(args).map(|_| true),
        Command::List => {
            cmd_list();
            Ok(true)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.downcast_ref::<Precondition>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
