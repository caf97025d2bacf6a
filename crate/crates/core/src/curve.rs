//! Deterministic expected-reward curves `μ(n)` indexed by pull count.
//!
//! Pull indices are 1-based everywhere: `μ(1)` is the expected reward of the
//! first pull. Increments follow `γ(n) = μ(n+1) − μ(n)` with `γ(0) = μ(1)`.

use std::fmt;
use std::sync::{Arc, RwLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Initial length of the cached mean table; it doubles on demand.
const TABLE_LEN: usize = 1 << 12;

/// Ranges from which [`CurveKind::RandomConcave`] draws its shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomCurveParams {
    /// Range of the asymptotic expected reward.
    pub asymptote: [f64; 2],
    /// Range of the exponent `c` for the `l^{-c}` family (must exceed 1).
    pub poly_exponent: [f64; 2],
    /// Range of the rate `c` for the `e^{-cl}` family.
    pub exp_rate: [f64; 2],
    /// Probability of drawing the polynomial family.
    pub poly_probability: f64,
}

impl Default for RandomCurveParams {
    fn default() -> Self {
        Self {
            asymptote: [0.2, 0.95],
            poly_exponent: [1.2, 2.5],
            exp_rate: [5e-4, 5e-3],
            poly_probability: 0.5,
        }
    }
}

impl RandomCurveParams {
    fn validate(&self) -> Result<()> {
        let ordered = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[0] <= r[1];
        if !ordered(self.asymptote) || self.asymptote[0] < 0.0 || self.asymptote[1] > 1.0 {
            return domain("asymptote range must lie within [0, 1]");
        }
        if !ordered(self.poly_exponent) || self.poly_exponent[0] <= 1.0 {
            return domain("polynomial exponents must exceed 1");
        }
        if !ordered(self.exp_rate) || self.exp_rate[0] <= 0.0 {
            return domain("exponential rates must be positive");
        }
        if !(0.0..=1.0).contains(&self.poly_probability) {
            return domain("poly_probability must lie in [0, 1]");
        }
        Ok(())
    }
}

/// Serializable description of a reward curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveKind {
    Constant {
        value: f64,
    },
    /// `μ(n) = min(slope·n, cap)`.
    LinearRamp {
        slope: f64,
        cap: f64,
    },
    /// `μ(n) = low` for `n ≤ threshold`, `high` afterwards. Non-decreasing
    /// but not concave.
    PiecewiseStep {
        threshold: usize,
        low: f64,
        high: f64,
    },
    /// `γ(l) = min(scale·l^{-exponent}, 1 − μ(l))` for `l ≥ 1`, `μ(1) = base`.
    PolyIncrement {
        scale: f64,
        exponent: f64,
        #[serde(default)]
        base: f64,
    },
    /// `γ(l) = min(scale·e^{-rate·l}, 1 − μ(l))` for `l ≥ 1`, `μ(1) = base`.
    ExpIncrement {
        scale: f64,
        rate: f64,
        #[serde(default)]
        base: f64,
    },
    /// `μ(n) = values[n-1]`, held at the last value beyond the table.
    Tabulated {
        values: Vec<f64>,
    },
    /// A poly or exp increment curve whose parameters are drawn from `params`
    /// with a generator seeded by `seed`.
    RandomConcave {
        seed: u64,
        params: RandomCurveParams,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Family {
    Poly,
    Exp,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct IncrementShape {
    family: Family,
    scale: f64,
    /// Exponent for `Poly`, rate for `Exp`.
    decay: f64,
    base: f64,
}

impl IncrementShape {
    /// The unclipped increment profile `f(l)`.
    fn profile(&self, l: usize) -> f64 {
        let l = l as f64;
        match self.family {
            Family::Poly => self.scale * l.powf(-self.decay),
            Family::Exp => self.scale * (-self.decay * l).exp(),
        }
    }

    /// One step of the clipped recursion: given `μ(l)` returns `(γ(l), μ(l+1))`.
    fn step(&self, l: usize, mu_l: f64) -> (f64, f64) {
        let room = 1.0 - mu_l;
        let f = self.profile(l);
        if f >= room {
            (room, 1.0)
        } else {
            (f, (mu_l + f).min(1.0))
        }
    }

    /// Extends `table` (holding `μ(1..=len)`) to at least `len` entries.
    fn extend(&self, table: &mut Vec<f64>, len: usize) {
        if table.is_empty() {
            table.push(self.base);
        }
        table.reserve(len.saturating_sub(table.len()));
        while table.len() < len {
            let l = table.len();
            let mu = self.step(l, table[l - 1]).1;
            table.push(mu);
        }
    }
}

/// A deterministic expected-reward function of the pull count.
///
/// Cheap to clone; parametric increment curves share a lazily grown table of
/// means across clones and threads.
#[derive(Clone)]
pub struct RewardCurve {
    kind: CurveKind,
    shape: Option<IncrementShape>,
    table: Arc<RwLock<Vec<f64>>>,
}

impl fmt::Debug for RewardCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("RewardCurve").field(&self.kind).finish()
    }
}

impl PartialEq for RewardCurve {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Serialize for RewardCurve {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.kind.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RewardCurve {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let kind = CurveKind::deserialize(d)?;
        RewardCurve::new(kind).map_err(serde::de::Error::custom)
    }
}

fn unit(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

/// Riemann zeta for `s > 1` via Euler–Maclaurin with a 1000-term head.
fn zeta(s: f64) -> f64 {
    const HEAD: usize = 1000;
    let n = HEAD as f64;
    let head: f64 = (1..=HEAD).map(|k| (k as f64).powf(-s)).sum();
    head + n.powf(1.0 - s) / (s - 1.0) - 0.5 * n.powf(-s) + s * n.powf(-s - 1.0) / 12.0
}

impl RewardCurve {
    /// Validates `kind` and builds the curve.
    pub fn new(kind: CurveKind) -> Result<Self> {
        let shape = match &kind {
            CurveKind::Constant { value } => {
                if !unit(*value) {
                    return domain(format!("constant {value} outside [0, 1]"));
                }
                None
            }
            CurveKind::LinearRamp { slope, cap } => {
                if !(slope.is_finite() && *slope >= 0.0) || !unit(*cap) {
                    return domain("linear ramp needs slope >= 0 and cap in [0, 1]");
                }
                None
            }
            CurveKind::PiecewiseStep { low, high, .. } => {
                if !unit(*low) || !unit(*high) || low > high {
                    return domain("piecewise step needs 0 <= low <= high <= 1");
                }
                None
            }
            CurveKind::PolyIncrement {
                scale,
                exponent,
                base,
            } => {
                if !(scale.is_finite() && *scale >= 0.0 && *exponent > 0.0 && unit(*base)) {
                    return domain("poly increment needs scale >= 0, exponent > 0, base in [0, 1]");
                }
                Some(IncrementShape {
                    family: Family::Poly,
                    scale: *scale,
                    decay: *exponent,
                    base: *base,
                })
            }
            CurveKind::ExpIncrement { scale, rate, base } => {
                if !(scale.is_finite() && *scale >= 0.0 && *rate > 0.0 && unit(*base)) {
                    return domain("exp increment needs scale >= 0, rate > 0, base in [0, 1]");
                }
                Some(IncrementShape {
                    family: Family::Exp,
                    scale: *scale,
                    decay: *rate,
                    base: *base,
                })
            }
            CurveKind::Tabulated { values } => {
                if values.is_empty() || !values.iter().all(|v| unit(*v)) {
                    return domain("tabulated curve needs at least one value, all in [0, 1]");
                }
                None
            }
            CurveKind::RandomConcave { seed, params } => {
                params.validate()?;
                Some(Self::draw_shape(*seed, params))
            }
        };
        Ok(Self {
            kind,
            shape,
            table: Arc::new(RwLock::new(Vec::new())),
        })
    }

    fn draw_shape(seed: u64, params: &RandomCurveParams) -> IncrementShape {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let poly = rng.random_bool(params.poly_probability);
        let asymptote = rng.random_range(params.asymptote[0]..=params.asymptote[1]);
        if poly {
            let c = rng.random_range(params.poly_exponent[0]..=params.poly_exponent[1]);
            IncrementShape {
                family: Family::Poly,
                scale: asymptote / zeta(c),
                decay: c,
                base: 0.0,
            }
        } else {
            let c = rng.random_range(params.exp_rate[0]..=params.exp_rate[1]);
            IncrementShape {
                family: Family::Exp,
                scale: asymptote * c.exp_m1(),
                decay: c,
                base: 0.0,
            }
        }
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::new(CurveKind::Constant { value })
    }

    pub fn linear_ramp(slope: f64, cap: f64) -> Result<Self> {
        Self::new(CurveKind::LinearRamp { slope, cap })
    }

    pub fn piecewise_step(threshold: usize, low: f64, high: f64) -> Result<Self> {
        Self::new(CurveKind::PiecewiseStep {
            threshold,
            low,
            high,
        })
    }

    pub fn poly_increment(scale: f64, exponent: f64, base: f64) -> Result<Self> {
        Self::new(CurveKind::PolyIncrement {
            scale,
            exponent,
            base,
        })
    }

    pub fn exp_increment(scale: f64, rate: f64, base: f64) -> Result<Self> {
        Self::new(CurveKind::ExpIncrement { scale, rate, base })
    }

    pub fn tabulated(values: Vec<f64>) -> Result<Self> {
        Self::new(CurveKind::Tabulated { values })
    }

    pub fn kind(&self) -> &CurveKind {
        &self.kind
    }

    /// Whether the curve is expected to satisfy concavity (every kind except
    /// the step).
    pub fn is_concave_kind(&self) -> bool {
        !matches!(self.kind, CurveKind::PiecewiseStep { .. })
    }

    fn shape_mean(&self, shape: &IncrementShape, n: usize) -> f64 {
        {
            let table = self.table.read().expect("mean table lock");
            if n <= table.len() {
                return table[n - 1];
            }
        }
        let mut table = self.table.write().expect("mean table lock");
        let len = table.len();
        shape.extend(&mut table, n.max(2 * len).max(TABLE_LEN));
        table[n - 1]
    }

    /// Expected reward of the `n`-th pull; `n` must be at least 1.
    pub fn mean_reward(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::Domain("pull indices start at 1".into()));
        }
        Ok(self.mean(n))
    }

    /// Unchecked form of [`mean_reward`](Self::mean_reward).
    ///
    /// # Panics
    /// Panics if `n == 0`.
    pub fn mean(&self, n: usize) -> f64 {
        assert!(n >= 1, "pull indices start at 1");
        match &self.kind {
            CurveKind::Constant { value } => *value,
            CurveKind::LinearRamp { slope, cap } => (n as f64 * slope).min(*cap),
            CurveKind::PiecewiseStep {
                threshold,
                low,
                high,
            } => {
                if n <= *threshold {
                    *low
                } else {
                    *high
                }
            }
            CurveKind::Tabulated { values } => values[(n - 1).min(values.len() - 1)],
            CurveKind::PolyIncrement { .. }
            | CurveKind::ExpIncrement { .. }
            | CurveKind::RandomConcave { .. } => {
                let shape = self.shape.expect("parametric curves carry a shape");
                self.shape_mean(&shape, n)
            }
        }
    }

    /// Increment `γ(n)`, with `γ(0) = μ(1)`.
    ///
    /// For the parametric kinds this is the clipped increment that generated
    /// the table, so `γ(n+1) ≤ γ(n)` holds exactly; it agrees with
    /// `μ(n+1) − μ(n)` up to rounding.
    pub fn increment(&self, n: usize) -> f64 {
        if n == 0 {
            return self.mean(1);
        }
        match &self.kind {
            CurveKind::Constant { .. } => 0.0,
            CurveKind::LinearRamp { slope, cap } => slope.min(cap - n as f64 * slope).max(0.0),
            CurveKind::PiecewiseStep {
                threshold,
                low,
                high,
            } => {
                if n == *threshold {
                    high - low
                } else {
                    0.0
                }
            }
            CurveKind::Tabulated { values } => {
                if n < values.len() {
                    values[n] - values[n - 1]
                } else {
                    0.0
                }
            }
            CurveKind::PolyIncrement { .. }
            | CurveKind::ExpIncrement { .. }
            | CurveKind::RandomConcave { .. } => {
                let shape = self.shape.expect("parametric curves carry a shape");
                shape.step(n, self.shape_mean(&shape, n)).0
            }
        }
    }

    /// First pull index in `[1, max_n]` where `μ` decreases, if any.
    pub fn first_decrease(&self, max_n: usize) -> Option<usize> {
        (1..=max_n).find(|&n| self.mean(n + 1) < self.mean(n))
    }

    /// First pull index in `[1, max_n]` where the increment grows, if any.
    pub fn first_convexity(&self, max_n: usize) -> Option<usize> {
        (1..=max_n).find(|&n| self.increment(n + 1) > self.increment(n))
    }

    /// Checks non-decreasing means and non-increasing increments on `[1, max_n]`.
    pub fn is_rising_on(&self, max_n: usize) -> bool {
        self.first_decrease(max_n).is_none() && self.first_convexity(max_n).is_none()
    }
}

impl fmt::Display for RewardCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.kind, self.shape) {
            (CurveKind::Constant { value }, _) => write!(f, "constant({value})"),
            (CurveKind::LinearRamp { slope, cap }, _) => {
                write!(f, "ramp(slope={slope}, cap={cap})")
            }
            (
                CurveKind::PiecewiseStep {
                    threshold,
                    low,
                    high,
                },
                _,
            ) => {
                write!(f, "step(at={threshold}, {low}->{high})")
            }
            (CurveKind::Tabulated { values }, _) => write!(f, "table(len={})", values.len()),
            (_, Some(s)) => {
                let name = match s.family {
                    Family::Poly => "poly",
                    Family::Exp => "exp",
                };
                write!(
                    f,
                    "{name}(scale={:.6}, c={:.6}, base={})",
                    s.scale, s.decay, s.base
                )
            }
            (_, None) => unreachable!("parametric curves carry a shape"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn constant_curve() {
        let c = RewardCurve::constant(0.5).unwrap();
        assert_eq!(c.mean_reward(7).unwrap(), 0.5);
        assert_eq!(c.increment(4), 0.0);
        assert_eq!(c.increment(0), 0.5);
    }

    #[test]
    fn zero_pull_index_is_rejected() {
        let c = RewardCurve::constant(0.5).unwrap();
        assert!(matches!(c.mean_reward(0), Err(Error::Domain(_))));
    }

    #[test]
    fn linear_ramp_values() {
        let t = 12.0;
        let c = RewardCurve::linear_ramp(1.0 / t, 0.5).unwrap();
        assert_abs_diff_eq!(c.mean_reward(3).unwrap(), 0.25, epsilon = 1e-15);
        assert_eq!(c.mean(6), 0.5);
        assert_eq!(c.mean(11), 0.5);
        let r = RewardCurve::linear_ramp(0.1, 1.0).unwrap();
        assert_abs_diff_eq!(r.increment(2), 0.1, epsilon = 1e-15);
        assert_eq!(r.increment(10), 0.0);
    }

    #[test]
    fn poly_increment_prefix_sum() {
        // μ(1)=0, γ(1)=1 saturates the headroom, γ(2) is clipped to 0.
        let c = RewardCurve::poly_increment(1.0, 2.0, 0.0).unwrap();
        let oracle = |n: usize| -> f64 {
            let mut mu: f64 = 0.0;
            for l in 1..n {
                mu = (mu + (l as f64).powi(-2)).min(1.0);
            }
            mu
        };
        assert_eq!(c.mean_reward(3).unwrap(), 1.0);
        for n in 1..50 {
            assert_abs_diff_eq!(c.mean(n), oracle(n), epsilon = 1e-15);
        }
    }

    #[test]
    fn poly_increment_unsaturated_matches_direct_sum() {
        let c = RewardCurve::poly_increment(0.3, 2.0, 0.1).unwrap();
        let mut mu = 0.1;
        for n in 1..2000 {
            assert_abs_diff_eq!(c.mean(n), mu, epsilon = 1e-12);
            assert_abs_diff_eq!(c.increment(n), 0.3 * (n as f64).powi(-2), epsilon = 1e-15);
            mu += 0.3 * (n as f64).powi(-2);
        }
    }

    #[test]
    fn tabulated_increment_is_finite_difference() {
        let c = RewardCurve::tabulated(vec![0.1, 0.3, 0.35]).unwrap();
        assert_abs_diff_eq!(c.increment(1), 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(c.increment(2), 0.05, epsilon = 1e-15);
        assert_eq!(c.increment(3), 0.0);
        assert_eq!(c.mean(10), 0.35);
    }

    #[test]
    fn step_is_monotone_but_not_concave() {
        let c = RewardCurve::piecewise_step(4, 0.0, 1.0).unwrap();
        assert_eq!(c.mean(4), 0.0);
        assert_eq!(c.mean(5), 1.0);
        assert!(c.first_decrease(100).is_none());
        assert_eq!(c.first_convexity(100), Some(3));
        assert!(!c.is_concave_kind());
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(RewardCurve::constant(1.5).is_err());
        assert!(RewardCurve::linear_ramp(-0.1, 0.5).is_err());
        assert!(RewardCurve::piecewise_step(3, 0.8, 0.2).is_err());
        assert!(RewardCurve::tabulated(vec![]).is_err());
        assert!(RewardCurve::poly_increment(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn random_concave_is_deterministic() {
        let p = RandomCurveParams::default();
        let a = RewardCurve::new(CurveKind::RandomConcave { seed: 9, params: p }).unwrap();
        let b = RewardCurve::new(CurveKind::RandomConcave { seed: 9, params: p }).unwrap();
        for n in [1, 10, 1000, 50_000] {
            assert_eq!(a.mean(n), b.mean(n));
        }
        assert_eq!(a.to_string(), b.to_string());
    }

    #[test]
    fn random_concave_approaches_asymptote() {
        let p = RandomCurveParams {
            poly_probability: 0.0,
            ..Default::default()
        };
        let c = RewardCurve::new(CurveKind::RandomConcave { seed: 1, params: p }).unwrap();
        // exp family with rate >= 5e-4 is within e^{-60} of its limit after 120k pulls
        let far = c.mean(120_000);
        assert!(far >= p.asymptote[0] - 1e-9 && far <= p.asymptote[1] + 1e-9);
    }

    #[test]
    fn zeta_two() {
        assert_abs_diff_eq!(
            zeta(2.0),
            std::f64::consts::PI.powi(2) / 6.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn table_grows_on_demand() {
        let c = RewardCurve::exp_increment(1e-6, 1e-5, 0.0).unwrap();
        let n = 64 * TABLE_LEN + 10;
        assert!(c.mean(n) > c.mean(TABLE_LEN));
        assert!(c.increment(n) <= c.increment(TABLE_LEN));
    }

    #[test]
    fn json_round_trip() {
        let c = RewardCurve::poly_increment(0.5, 1.5, 0.1).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(
            s,
            r#"{"kind":"poly_increment","scale":0.5,"exponent":1.5,"base":0.1}"#
        );
        let back: RewardCurve = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
        assert!(serde_json::from_str::<RewardCurve>(r#"{"kind":"constant","value":2.0}"#).is_err());
    }
}
