//! Closed-form upper bounds on the cumulative increment `Υ(M, q)` when every
//! increment is dominated by a polynomial or exponential profile.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Profile `f(l)` dominating the increments: `b·l^{−c}` or `b·e^{−cl}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum IncrementFamily {
    Poly { c: f64 },
    Exp { c: f64 },
}

impl IncrementFamily {
    pub fn rate(&self) -> f64 {
        match *self {
            IncrementFamily::Poly { c } | IncrementFamily::Exp { c } => c,
        }
    }

    /// `f(l)` at scale `b`.
    pub fn profile(&self, b: f64, l: usize) -> f64 {
        match *self {
            IncrementFamily::Poly { c } => b * (l as f64).powf(-c),
            IncrementFamily::Exp { c } => b * (-c * l as f64).exp(),
        }
    }
}

/// Upper bound on `Υ(M, q)` for any instance with `γ_i(l) ≤ f(l)`, obtained by
/// comparing the sum with an integral.
///
/// * exp: `b^q e^{−cq} (1 + 1/(cq))`
/// * poly: `b^q + b^q · { M^{1−cq}/(1−cq) | ln M | 1/(cq−1) }` for `cq <, =, > 1`
pub fn upsilon_rate_bound(family: IncrementFamily, b: f64, q: f64, horizon: usize) -> Result<f64> {
    let c = family.rate();
    if !(c > 0.0 && c.is_finite()) {
        return domain(format!("rate c = {c} must be positive"));
    }
    if !(b > 0.0 && b.is_finite()) {
        return domain(format!("scale b = {b} must be positive"));
    }
    if !(0.0..=1.0).contains(&q) {
        return domain(format!("exponent q = {q} outside [0, 1]"));
    }
    if horizon < 2 {
        return domain("horizon must be at least 2");
    }
    let bq = b.powf(q);
    let cq = c * q;
    let m = horizon as f64;
    let bound = match family {
        IncrementFamily::Exp { .. } => bq * (-cq).exp() * (1.0 + 1.0 / cq),
        IncrementFamily::Poly { .. } => {
            let tail = if cq < 1.0 {
                m.powf(1.0 - cq) / (1.0 - cq)
            } else if cq == 1.0 {
                m.ln()
            } else {
                1.0 / (cq - 1.0)
            };
            bq + bq * tail
        }
    };
    Ok(bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn poly_square_is_two() {
        for m in [2, 10, 1000] {
            let v = upsilon_rate_bound(IncrementFamily::Poly { c: 2.0 }, 1.0, 1.0, m).unwrap();
            assert_eq!(v, 2.0);
        }
    }

    #[test]
    fn poly_harmonic_is_log() {
        let k = 7.0f64;
        let m = k.exp().round() as usize;
        let v = upsilon_rate_bound(IncrementFamily::Poly { c: 1.0 }, 1.0, 1.0, m).unwrap();
        assert_abs_diff_eq!(v, 1.0 + (m as f64).ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(v, 1.0 + k, epsilon = 1e-3);
    }

    #[test]
    fn exp_unit() {
        let v = upsilon_rate_bound(IncrementFamily::Exp { c: 1.0 }, 1.0, 1.0, 10).unwrap();
        assert_abs_diff_eq!(v, 2.0 * (-1.0f64).exp(), epsilon = 1e-15);
        let direct: f64 = (1..10).map(|l| (-(l as f64)).exp()).sum();
        assert!(direct <= v);
    }

    #[test]
    fn rejects_bad_arguments() {
        let p = IncrementFamily::Poly { c: 1.0 };
        assert!(upsilon_rate_bound(p, 1.0, 1.5, 10).is_err());
        assert!(upsilon_rate_bound(p, 0.0, 0.5, 10).is_err());
        assert!(upsilon_rate_bound(p, 1.0, 0.5, 1).is_err());
        assert!(upsilon_rate_bound(IncrementFamily::Exp { c: 0.0 }, 1.0, 0.5, 10).is_err());
    }
}
