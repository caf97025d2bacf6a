//! Bandit policies behind a common interface, plus a serializable registry.

mod kl;
mod red_ucb;
mod rexp3;
mod ser4;
mod sw_ts;
mod sw_ucb;
mod window;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use kl::{bernoulli_kl, kl_upper_bound, KlUcb, SwKlUcb};
pub use red_ucb::{RedUcb, RedUcbDet};
pub use rexp3::Rexp3;
pub use ser4::Ser4;
pub use sw_ts::SwTs;
pub use sw_ucb::SwUcb;
pub use window::SlidingWindow;

/// An online arm-selection rule.
///
/// Each round the driver calls [`select`](Policy::select) once and then
/// [`update`](Policy::update) once with the pulled arm and its reward.
/// Rounds are 1-based.
pub trait Policy: Send {
    fn name(&self) -> &'static str;

    /// Clears all statistics and reseeds the internal generator.
    fn reset(&mut self, seed: u64);

    fn select(&mut self, t: usize) -> usize;

    fn update(&mut self, arm: usize, reward: f64, t: usize);

    /// Index of the arm returned by the last `select`, for index policies.
    fn last_index(&self) -> Option<f64> {
        None
    }

    /// Resolved parameters, for report headers.
    fn describe(&self) -> String;
}

/// Lowest-index maximizer; `+∞` entries compare above every finite value.
pub fn select_argmax(indices: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in indices.iter().enumerate().skip(1) {
        if *v > indices[best] {
            best = i;
        }
    }
    best
}

/// What a policy may know about the problem before the first round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyContext {
    pub num_arms: usize,
    pub horizon: usize,
    /// Subgaussian scale of the reward noise.
    pub noise_scale: f64,
    pub noiseless: bool,
}

/// Policy name plus optional overrides; unset fields take horizon-dependent
/// defaults when the policy is built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum PolicyConfig {
    RedUcbDet,
    RedUcb {
        epsilon: Option<f64>,
        alpha: Option<f64>,
        sigma: Option<f64>,
    },
    Rexp3 {
        v_t: Option<f64>,
        delta_t: Option<usize>,
        gamma: Option<f64>,
    },
    Klucb {
        c: Option<f64>,
    },
    SwUcb {
        tau: Option<usize>,
        xi: Option<f64>,
    },
    SwKlucb {
        tau: Option<usize>,
        c: Option<f64>,
    },
    SwTs {
        tau: Option<usize>,
        beta: Option<f64>,
    },
    Ser4 {
        delta: Option<f64>,
        eps: Option<f64>,
        phi: Option<f64>,
        switches: Option<f64>,
    },
}

/// Registry names in their fixed order.
pub const POLICY_NAMES: [&str; 8] = [
    "red_ucb_det",
    "red_ucb",
    "rexp3",
    "klucb",
    "sw_ucb",
    "sw_klucb",
    "sw_ts",
    "ser4",
];

pub(crate) fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

fn check_range(name: &str, value: Option<f64>, ok: impl Fn(f64) -> bool) -> Result<()> {
    match value {
        Some(v) if !ok(v) => config_err(format!("{name} = {v} is out of range")),
        _ => Ok(()),
    }
}

impl PolicyConfig {
    /// Default configuration for a registry name.
    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name {
            "red_ucb_det" => PolicyConfig::RedUcbDet,
            "red_ucb" => PolicyConfig::RedUcb {
                epsilon: None,
                alpha: None,
                sigma: None,
            },
            "rexp3" => PolicyConfig::Rexp3 {
                v_t: None,
                delta_t: None,
                gamma: None,
            },
            "klucb" => PolicyConfig::Klucb { c: None },
            "sw_ucb" => PolicyConfig::SwUcb {
                tau: None,
                xi: None,
            },
            "sw_klucb" => PolicyConfig::SwKlucb { tau: None, c: None },
            "sw_ts" => PolicyConfig::SwTs {
                tau: None,
                beta: None,
            },
            "ser4" => PolicyConfig::Ser4 {
                delta: None,
                eps: None,
                phi: None,
                switches: None,
            },
            other => {
                return config_err(format!(
                    "unknown policy '{other}'; expected one of {}",
                    POLICY_NAMES.join(", ")
                ))
            }
        })
    }

    /// Every registry entry with default parameters.
    pub fn registry() -> Vec<Self> {
        POLICY_NAMES
            .iter()
            .map(|n| Self::from_name(n).expect("registry names parse"))
            .collect()
    }

    pub fn name(&self) -> &'static str {
        match self {
            PolicyConfig::RedUcbDet => "red_ucb_det",
            PolicyConfig::RedUcb { .. } => "red_ucb",
            PolicyConfig::Rexp3 { .. } => "rexp3",
            PolicyConfig::Klucb { .. } => "klucb",
            PolicyConfig::SwUcb { .. } => "sw_ucb",
            PolicyConfig::SwKlucb { .. } => "sw_klucb",
            PolicyConfig::SwTs { .. } => "sw_ts",
            PolicyConfig::Ser4 { .. } => "ser4",
        }
    }

    /// Rejects out-of-range overrides.
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        let prob = |v: f64| (0.0..=1.0).contains(&v);
        let pos_int = |name: &str, v: Option<usize>| match v {
            Some(0) => config_err(format!("{name} must be at least 1")),
            _ => Ok(()),
        };
        match self {
            PolicyConfig::RedUcbDet => Ok(()),
            PolicyConfig::RedUcb {
                epsilon,
                alpha,
                sigma,
            } => {
                check_range("epsilon", *epsilon, |v| v > 0.0 && v < 0.5)?;
                check_range("alpha", *alpha, |v| v > 2.0 && v.is_finite())?;
                check_range("sigma", *sigma, |v| v >= 0.0 && v.is_finite())
            }
            PolicyConfig::Rexp3 {
                v_t,
                delta_t,
                gamma,
            } => {
                check_range("v_t", *v_t, pos)?;
                pos_int("delta_t", *delta_t)?;
                check_range("gamma", *gamma, |v| v > 0.0 && v <= 1.0)
            }
            PolicyConfig::Klucb { c } => check_range("c", *c, |v| v >= 0.0 && v.is_finite()),
            PolicyConfig::SwUcb { tau, xi } => {
                pos_int("tau", *tau)?;
                check_range("xi", *xi, pos)
            }
            PolicyConfig::SwKlucb { tau, c } => {
                pos_int("tau", *tau)?;
                check_range("c", *c, |v| v >= 0.0 && v.is_finite())
            }
            PolicyConfig::SwTs { tau, beta } => {
                pos_int("tau", *tau)?;
                check_range("beta", *beta, |v| (0.0..1.0).contains(&v))
            }
            PolicyConfig::Ser4 {
                delta,
                eps,
                phi,
                switches,
            } => {
                check_range("delta", *delta, |v| v > 0.0 && v < 1.0)?;
                check_range("eps", *eps, prob)?;
                check_range("phi", *phi, prob)?;
                check_range("switches", *switches, |v| v >= 0.0 && v.is_finite())
            }
        }
    }

    /// Instantiates the policy, filling unset parameters from `ctx`.
    pub fn build(&self, ctx: &PolicyContext) -> Result<Box<dyn Policy>> {
        self.validate()?;
        if ctx.num_arms == 0 || ctx.horizon == 0 {
            return config_err("policies need at least one arm and one round");
        }
        let k = ctx.num_arms;
        let t = ctx.horizon;
        Ok(match self {
            PolicyConfig::RedUcbDet => {
                if !ctx.noiseless {
                    return config_err(
                        "red_ucb_det needs exact expected rewards; the instance is noisy",
                    );
                }
                Box::new(RedUcbDet::new(k))
            }
            PolicyConfig::RedUcb {
                epsilon,
                alpha,
                sigma,
            } => Box::new(RedUcb::new(
                k,
                epsilon.unwrap_or(0.25),
                alpha.unwrap_or(3.0),
                sigma.unwrap_or(ctx.noise_scale),
            )?),
            PolicyConfig::Rexp3 {
                v_t,
                delta_t,
                gamma,
            } => {
                let v = v_t.unwrap_or(k as f64);
                let d = delta_t.unwrap_or_else(|| Rexp3::default_epoch(k, t, v));
                let g = gamma.unwrap_or_else(|| Rexp3::default_gamma(k, d));
                Box::new(Rexp3::new(k, d, g))
            }
            PolicyConfig::Klucb { c } => Box::new(KlUcb::new(k, c.unwrap_or(3.0))),
            PolicyConfig::SwUcb { tau, xi } => Box::new(SwUcb::new(
                k,
                tau.unwrap_or_else(|| SwUcb::default_tau(t)),
                xi.unwrap_or(0.6),
            )),
            PolicyConfig::SwKlucb { tau, c } => Box::new(SwKlUcb::new(
                k,
                tau.unwrap_or_else(|| SwKlUcb::default_tau(t)),
                c.unwrap_or(3.0),
            )),
            PolicyConfig::SwTs { tau, beta } => {
                let b = beta.unwrap_or(0.5);
                Box::new(SwTs::new(k, tau.unwrap_or_else(|| SwTs::default_tau(t, b))))
            }
            PolicyConfig::Ser4 {
                delta,
                eps,
                phi,
                switches,
            } => {
                let delta = delta.unwrap_or(1.0 / t as f64);
                let eps = eps.unwrap_or(1.0 / (k * t) as f64);
                let phi = phi.unwrap_or_else(|| Ser4::default_phi(k, t, switches.unwrap_or(1.0)));
                Box::new(Ser4::new(k, delta, eps, phi))
            }
        })
    }
}
