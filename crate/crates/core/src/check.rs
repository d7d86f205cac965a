//! Runtime verification of a generalized Gauss rule against its measure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::RecurrenceMeasure;
use crate::quadrature;
use crate::real::Real;
use crate::rulegen::GenGaussRule;
use crate::tridiag;

/// Relative tolerance on `|Q(t^k) - mu_k| / max(1, |mu_k|)`.
pub const EXACTNESS_TOL: f64 = 1e-10;
/// Relative tolerance on the leading-error identity.
pub const IDENTITY_TOL: f64 = 1e-9;
/// Multiple of the working epsilon allowed for cancellation in `mu_N - Q(t^N)`.
const ROUNDOFF_FACTOR: f64 = 64.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleCheck {
    pub n: usize,
    pub r: usize,
    pub s: usize,
    pub min_weight: f64,
    pub positive: bool,
    /// `max_k |Q(t^k) - mu_k| / max(1, |mu_k|)` over `k <= 2n + r + s - 1`.
    pub exactness_defect: f64,
    pub exact: bool,
    /// `mu_N - Q(t^N)` for `N = 2n + r + s`.
    pub identity_lhs: f64,
    /// `int (t-a)^r (t-b)^s prod (t - t_k)^2 dlambda`.
    pub identity_rhs: f64,
    pub identity_rel: f64,
    /// Rounding level of `mu_N - Q(t^N)` in the working precision.
    pub identity_roundoff: f64,
    pub identity_holds: bool,
    pub norm_estimate: f64,
    pub norm_bound: Option<f64>,
    pub norm_within_bound: bool,
}

impl RuleCheck {
    pub fn passed(&self) -> bool {
        self.positive && self.exact && self.identity_holds && self.norm_within_bound
    }
}

/// Moment data of one monomial: `Q(t^k)` together with the sum of the
/// absolute values of its terms.
fn rule_on_monomial<T: Real>(rule: &GenGaussRule<T>, k: usize) -> (T, T) {
    let deriv = |x: f64, count: usize| -> Vec<T> {
        let x = T::from_f64(x);
        let mut out = Vec::with_capacity(count);
        for j in 0..count {
            if j > k {
                out.push(T::zero());
                continue;
            }
            let mut c = T::one();
            for i in 0..j {
                c *= T::from_usize(k - i);
            }
            out.push(c * x.powi((k - j) as u32));
        }
        out
    };
    let left = rule.a.map(|a| deriv(a, rule.r)).unwrap_or_default();
    let right = rule.b.map(|b| deriv(b, rule.s)).unwrap_or_default();
    let values: Vec<T> = rule.nodes.iter().map(|t| t.powi(k as u32)).collect();
    let q = rule.combine(&left, &values, &right);
    let abs = |v: &[T]| v.iter().map(|x| x.abs()).collect::<Vec<T>>();
    let abs_rule = GenGaussRule {
        a: rule.a,
        r: rule.r,
        b: rule.b,
        s: rule.s,
        n: rule.n,
        nodes: rule.nodes.clone(),
        interior_weights: abs(&rule.interior_weights),
        left_weights: abs(&rule.left_weights),
        right_weights: abs(&rule.right_weights),
        degree_exact: rule.degree_exact,
    };
    let magnitude = {
        let mut acc = T::zero();
        for (w, d) in abs_rule.left_weights.iter().zip(abs(&left)) {
            acc += *w * d;
        }
        for (w, v) in abs_rule.interior_weights.iter().zip(abs(&values)) {
            acc += *w * v;
        }
        for (w, d) in abs_rule.right_weights.iter().zip(abs(&right)) {
            acc += *w * d;
        }
        acc
    };
    (q, magnitude)
}

/// Checks positivity, exactness, the leading-error identity and the
/// norm bound, with moments computed in the rule's own arithmetic.
pub fn check_rule<T: Real>(m: &RecurrenceMeasure, rule: &GenGaussRule<T>) -> Result<RuleCheck> {
    let big_n = 2 * rule.n + rule.r + rule.s;
    if big_n == 0 {
        return Err(Error::domain("empty rule"));
    }
    let points = big_n / 2 + 1;
    let (alpha, beta) = m.coefficients::<T>(points)?;
    let (xs, ws) = tridiag::gauss_nodes_weights(&alpha, &beta, points)?;
    let moment = |k: usize| -> T {
        let mut acc = T::zero();
        for (x, w) in xs.iter().zip(&ws) {
            acc += *w * x.powi(k as u32);
        }
        acc
    };

    let mut exactness_defect = 0.0f64;
    for k in 0..big_n {
        let (q, _) = rule_on_monomial(rule, k);
        let mu = moment(k);
        let defect = (q - mu).abs().to_f64() / mu.abs().to_f64().max(1.0);
        exactness_defect = exactness_defect.max(defect);
    }

    let (q_top, magnitude) = rule_on_monomial(rule, big_n);
    let mu_top = moment(big_n);
    let lhs = mu_top - q_top;
    let mut rhs = T::zero();
    for (x, w) in xs.iter().zip(&ws) {
        let mut p = *w;
        if let Some(a) = rule.a {
            p *= (*x - T::from_f64(a)).powi(rule.r as u32);
        }
        if let Some(b) = rule.b {
            p *= (*x - T::from_f64(b)).powi(rule.s as u32);
        }
        for t in &rule.nodes {
            let d = *x - *t;
            p *= d * d;
        }
        rhs += p;
    }
    let roundoff =
        ROUNDOFF_FACTOR * T::epsilon().to_f64() * (magnitude.to_f64() + mu_top.abs().to_f64());
    let gap = (lhs - rhs).abs().to_f64();
    let rhs_abs = rhs.abs().to_f64();
    let identity_rel = if rhs_abs > 0.0 { gap / rhs_abs } else { gap };

    let f64_rule = rule.to_f64();
    let min_weight = f64_rule.min_weight().unwrap_or(f64::INFINITY);
    let norm_estimate = quadrature::norm_estimate(&f64_rule);
    let norm_bound = quadrature::norm_bound_rate2(&f64_rule).ok();
    Ok(RuleCheck {
        n: rule.n,
        r: rule.r,
        s: rule.s,
        min_weight,
        positive: min_weight > 0.0,
        exactness_defect,
        exact: exactness_defect <= EXACTNESS_TOL,
        identity_lhs: lhs.to_f64(),
        identity_rhs: rhs.to_f64(),
        identity_rel,
        identity_roundoff: roundoff,
        identity_holds: gap <= IDENTITY_TOL * rhs_abs + roundoff,
        norm_estimate,
        norm_within_bound: norm_bound.is_none_or(|bound| norm_estimate <= bound * (1.0 + 1e-12)),
        norm_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{jacobi_measure, laguerre_measure};
    use crate::real::DoubleDouble;
    use crate::rulegen::{build_rule, build_rule_in};

    #[test]
    fn lobatto_identity_by_hand() {
        let m = jacobi_measure(0.0, 0.0).unwrap();
        let rule = build_rule(&m, -1.0, 1, 1.0, 1, 0).unwrap();
        let report = check_rule(&m, &rule).unwrap();
        // trapezoid: mu_2 - Q(t^2) = 2/3 - 2 = int (t^2 - 1) dt
        assert!((report.identity_lhs + 4.0 / 3.0).abs() < 1e-14);
        assert!((report.identity_rhs + 4.0 / 3.0).abs() < 1e-14);
        assert!(report.passed());
    }

    #[test]
    fn double_double_meets_the_flat_tolerance() {
        let m = jacobi_measure(0.5, -0.5).unwrap();
        let rule = build_rule_in::<DoubleDouble>(&m, -1.0, 5, 1.0, 6, 18).unwrap();
        let report = check_rule(&m, &rule).unwrap();
        assert!(report.identity_rel < IDENTITY_TOL, "{report:?}");
        assert!(report.exactness_defect < EXACTNESS_TOL, "{report:?}");
        assert!(report.passed());
    }

    #[test]
    fn half_line_rule_has_no_norm_bound() {
        let m = laguerre_measure(0.0).unwrap();
        let rule = build_rule(&m, 0.0, 2, f64::INFINITY, 0, 4).unwrap();
        let report = check_rule(&m, &rule).unwrap();
        assert!(report.norm_bound.is_none());
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn tampered_weight_fails() {
        let m = jacobi_measure(0.0, 0.0).unwrap();
        let mut rule = build_rule(&m, -1.0, 2, 1.0, 2, 3).unwrap();
        rule.interior_weights[1] = -rule.interior_weights[1];
        let report = check_rule(&m, &rule).unwrap();
        assert!(!report.positive);
        assert!(!report.exact);
        assert!(!report.passed());
    }
}
