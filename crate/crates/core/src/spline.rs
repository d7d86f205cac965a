//! Moment-preserving splines on `[0, 1]` from generalized Gauss rules.
//!
//! The spline has the form
//! `sigma(t) = sum_k c_k (tau_k - t)_+^m + sum_i e_i (t - 1)^i / i!`
//! and matches `int t^j f(t) dt` for `j <= 2n + m`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exprcalc::Expr;
use crate::measures::{self, RecurrenceMeasure};
use crate::rulegen::{self, GenGaussRule};

/// Samples used for the sign check of the density.
pub const SIGN_SAMPLES: usize = 2001;
pub const MOMENT_POINTS: usize = 64;
pub const MOMENT_CHECK_POINTS: usize = 96;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineData {
    pub m: usize,
    pub knots: Vec<f64>,
    pub jump_coeffs: Vec<f64>,
    pub endpoint_block: Vec<f64>,
}

/// Which one-sided limit to take at a knot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

fn falling(m: usize, k: usize) -> f64 {
    (m - k + 1..=m).map(|v| v as f64).product()
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

impl SplineData {
    pub fn n(&self) -> usize {
        self.knots.len()
    }

    /// Highest moment order reproduced, `2n + m`.
    pub fn exact_moments(&self) -> usize {
        2 * self.n() + self.m
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.derivative(t, 0, Side::Right)
    }

    /// `sigma^(k)(t)`, with truncated powers switched on or off at a
    /// knot according to `side`.
    pub fn derivative(&self, t: f64, k: usize, side: Side) -> f64 {
        let m = self.m;
        let mut total = 0.0;
        if k <= m {
            let scale = falling(m, k) * if k % 2 == 0 { 1.0 } else { -1.0 };
            for (&tau, &c) in self.knots.iter().zip(&self.jump_coeffs) {
                let active = match side {
                    Side::Left => t <= tau,
                    Side::Right => t < tau,
                };
                if active {
                    total += c * scale * (tau - t).powi((m - k) as i32);
                }
            }
        }
        for (i, &e) in self.endpoint_block.iter().enumerate().skip(k) {
            total += e * (t - 1.0).powi((i - k) as i32) / factorial(i - k);
        }
        total
    }

    /// `int_0^1 t^j sigma(t) dt` in closed form.
    pub fn moment(&self, j: usize) -> f64 {
        let m = self.m;
        let jumps: f64 = self
            .knots
            .iter()
            .zip(&self.jump_coeffs)
            .map(|(&tau, &c)| c * beta_int(j, m) * tau.powi((j + m + 1) as i32))
            .sum();
        let block: f64 = self
            .endpoint_block
            .iter()
            .enumerate()
            .map(|(i, &e)| {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                e * sign * beta_int(j, i) / factorial(i)
            })
            .sum();
        jumps + block
    }

    /// `count` equispaced samples `(t, sigma(t))` on `[0, 1]`.
    pub fn sample(&self, count: usize) -> Vec<(f64, f64)> {
        match count {
            0 => Vec::new(),
            1 => vec![(0.0, self.eval(0.0))],
            _ => (0..count)
                .map(|i| {
                    let t = i as f64 / (count - 1) as f64;
                    (t, self.eval(t))
                })
                .collect(),
        }
    }
}

/// `j! i! / (j + i + 1)!`.
fn beta_int(j: usize, i: usize) -> f64 {
    let mut v = 1.0 / (j + i + 1) as f64;
    for k in 1..=i {
        v *= k as f64 / (j + k) as f64;
    }
    v
}

fn density_at(f: &Expr, m: usize, t: f64) -> Result<f64> {
    let d = f.jet(t, m + 1)?.derivatives()[m + 1];
    let sign = if (m + 1) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * d / factorial(m))
}

/// Rejects densities that turn negative on `[0, 1]`.
pub fn check_density_sign(f: &Expr, m: usize) -> Result<()> {
    let mut values = Vec::with_capacity(SIGN_SAMPLES);
    for i in 0..SIGN_SAMPLES {
        let t = i as f64 / (SIGN_SAMPLES - 1) as f64;
        values.push(density_at(f, m, t)?);
    }
    let scale = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 {
        return Err(Error::domain(
            "density vanishes identically: zero mass, spline does not exist",
        ));
    }
    if let Some(i) = values
        .iter()
        .position(|&v| v < -1e-14 * scale || v.is_nan())
    {
        let t = i as f64 / (SIGN_SAMPLES - 1) as f64;
        return Err(Error::domain(format!(
            "measure not positive, spline may not exist (density {:e} at t = {t})",
            values[i]
        )));
    }
    Ok(())
}

/// Recurrence coefficients of `(-1)^(m+1) f^(m+1)(t) / m! dt` on `[0, 1]`.
pub fn spline_measure(f: &Expr, m: usize, n: usize) -> Result<RecurrenceMeasure> {
    check_density_sign(f, m)?;
    let r = m + 1;
    let k_max = (n + 2 * r).max(rulegen::auxiliary_points(n, r, r)) + 1;
    measures::stieltjes_from_density(|t| Ok(density_at(f, m, t)?.max(0.0)), 0.0, 1.0, k_max)
}

/// The rule `Q_{n, m+1, m+1}` on `[0, 1]` for the spline measure.
pub fn spline_rule(f: &Expr, m: usize, n: usize) -> Result<GenGaussRule> {
    let measure = spline_measure(f, m, n)?;
    rulegen::build_rule(&measure, 0.0, m + 1, 1.0, m + 1, n)
}

/// Builds the spline of degree `m` with `n` knots.
pub fn moment_spline(f: &Expr, m: usize, n: usize) -> Result<SplineData> {
    let rule = spline_rule(f, m, n)?;
    let at_one = f.jet(1.0, m)?.derivatives();
    let m_fact = factorial(m);
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let endpoint_block = (0..=m)
        .map(|i| at_one[i] + sign * m_fact * rule.right_weights[m - i])
        .collect();
    Ok(SplineData {
        m,
        knots: rule.nodes.clone(),
        jump_coeffs: rule.interior_weights.clone(),
        endpoint_block,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentResidual {
    pub j: usize,
    pub mu: f64,
    pub spline_moment: f64,
    pub residual: f64,
    /// `|mu(64 points) - mu(96 points)|`.
    pub mu_uncertainty: f64,
}

/// `int_0^1 t^j f(t) dt` with the 64- and 96-point Gauss-Legendre values.
pub fn target_moment(f: &Expr, j: usize) -> Result<(f64, f64)> {
    let legendre = measures::jacobi_measure(0.0, 0.0)?;
    let mut out = [0.0; 2];
    for (slot, points) in out.iter_mut().zip([MOMENT_POINTS, MOMENT_CHECK_POINTS]) {
        let rule = measures::gauss_rule(&legendre, points)?;
        *slot = 0.5
            * rule.try_integrate(|u| {
                let t = 0.5 * (u + 1.0);
                Ok(t.powi(j as i32) * f.eval(t)?)
            })?;
    }
    Ok((out[0], out[1]))
}

/// Moment residuals `|int t^j sigma - mu_j|` for `j = 0..=order`.
pub fn verify_spline_moments(
    sd: &SplineData,
    f: &Expr,
    order: usize,
) -> Result<Vec<MomentResidual>> {
    (0..=order)
        .map(|j| {
            let (mu, mu_check) = target_moment(f, j)?;
            let spline_moment = sd.moment(j);
            Ok(MomentResidual {
                j,
                mu,
                spline_moment,
                residual: (spline_moment - mu).abs(),
                mu_uncertainty: (mu - mu_check).abs(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprcalc::parse;

    #[test]
    fn exponential_linear_spline() {
        let f = parse("exp(-t)").unwrap();
        let sd = moment_spline(&f, 1, 2).unwrap();
        assert_eq!(sd.knots.len(), 2);
        assert!(sd.knots.iter().all(|&t| t > 0.0 && t < 1.0));
        assert!(sd.jump_coeffs.iter().all(|&c| c > 0.0));
        let res = verify_spline_moments(&sd, &f, 6).unwrap();
        for row in &res[..=5] {
            assert!(row.residual < 1e-10 * row.mu.abs().max(1.0), "{row:?}");
            assert!(row.mu_uncertainty < 1e-15);
        }
        // R(t^8) / 56 for the measure t^2 (1-t)^2 e^-t dt, computed independently
        let beyond = 6.156648979513032e-7;
        assert!(
            (res[6].residual / beyond - 1.0).abs() < 1e-6,
            "{:?}",
            res[6]
        );
    }

    #[test]
    fn closed_form_moments_of_exp() {
        // int_0^1 t e^-t dt = 1 - 2/e
        let f = parse("exp(-t)").unwrap();
        let (mu, _) = target_moment(&f, 1).unwrap();
        assert!((mu - (1.0 - 2.0 / std::f64::consts::E)).abs() < 1e-15);
    }

    #[test]
    fn quadratic_spline_for_reciprocal() {
        let f = parse("1/(1+t)").unwrap();
        let sd = moment_spline(&f, 2, 1).unwrap();
        let res = verify_spline_moments(&sd, &f, 4).unwrap();
        for row in &res {
            assert!(row.residual < 1e-10, "{row:?}");
        }
    }

    #[test]
    fn no_knots_matches_through_degree() {
        let f = parse("exp(-t)").unwrap();
        let sd = moment_spline(&f, 2, 0).unwrap();
        assert!(sd.knots.is_empty());
        let res = verify_spline_moments(&sd, &f, 3).unwrap();
        for row in &res[..=2] {
            assert!(row.residual < 1e-10, "{row:?}");
        }
        assert!(res[3].residual > 1e-8);
    }

    #[test]
    fn derivatives_continue_across_knots() {
        let f = parse("exp(-t)").unwrap();
        let sd = moment_spline(&f, 3, 3).unwrap();
        for &tau in &sd.knots {
            for k in 0..sd.m {
                let jump = sd.derivative(tau, k, Side::Left) - sd.derivative(tau, k, Side::Right);
                assert!(jump.abs() < 1e-12, "k={k} jump={jump}");
            }
            let top = sd.derivative(tau, sd.m, Side::Left) - sd.derivative(tau, sd.m, Side::Right);
            assert!(top.abs() > 1e-6);
        }
    }

    #[test]
    fn polynomial_and_sign_failures() {
        let quad = parse("t^2 + 3*t").unwrap();
        assert!(matches!(moment_spline(&quad, 2, 1), Err(Error::Domain(_))));
        let grows = parse("exp(t)").unwrap();
        assert!(moment_spline(&grows, 1, 1).is_ok());
        match moment_spline(&grows, 2, 1) {
            Err(Error::Domain(msg)) => assert!(msg.contains("not positive")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn samples_cover_the_interval() {
        let f = parse("exp(-t)").unwrap();
        let sd = moment_spline(&f, 1, 2).unwrap();
        let rows = sd.sample(11);
        assert_eq!(rows.len(), 11);
        assert_eq!(rows[0].0, 0.0);
        assert_eq!(rows[10].0, 1.0);
        assert_eq!(sd.sample(0).len(), 0);
    }
}
