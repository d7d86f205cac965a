//! Rate studies of the remainder `R_{n, r_n, s_n}(f)` as `n` grows.

use std::ops::RangeInclusive;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::RecurrenceMeasure;
use crate::potential;
use crate::quadrature::{self, Integrand};
use crate::real::Precision;
use crate::rulegen::{self, GenGaussRule};

/// Rows with `|R_n|` at most this multiple of the roundoff floor are
/// left out of the fit.
pub const FLOOR_MARGIN: f64 = 100.0;
/// Number of smallest `n` always left out of the fit.
pub const SKIPPED_LEADING: usize = 2;

/// Endpoint orders `r_n = round(alpha n)`, `s_n = round(beta n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub alpha: f64,
    pub beta: f64,
}

impl Schedule {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha >= 0.0 && beta >= 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(Error::domain(format!(
                "schedule needs finite alpha, beta >= 0, got ({alpha}, {beta})"
            )));
        }
        Ok(Schedule { alpha, beta })
    }

    pub fn orders(&self, n: usize) -> (usize, usize) {
        let r = (self.alpha * n as f64).round() as usize;
        let s = (self.beta * n as f64).round() as usize;
        (r, s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub n: usize,
    pub r: usize,
    pub s: usize,
    pub abs_error: f64,
    #[serde(default)]
    pub roundoff_floor: f64,
}

impl RateRow {
    pub fn above_floor(&self) -> bool {
        self.abs_error > FLOOR_MARGIN * self.roundoff_floor
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateStudy {
    pub schedule: Schedule,
    pub rows: Vec<RateRow>,
    pub fitted_rate: Option<f64>,
    pub predicted_rate: Option<f64>,
    /// Largest per-row floor in the study.
    pub roundoff_floor: f64,
    pub saturated: bool,
    /// First and last `n` used by the fit.
    pub fit_window: Option<(usize, usize)>,
}

impl RateStudy {
    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().map(|row| row.abs_error).collect()
    }

    /// Attaches the predicted rate for a singularity at `z0`.
    pub fn with_prediction(mut self, m: &RecurrenceMeasure, z0: Complex64) -> Result<Self> {
        self.predicted_rate = Some(predicted_rate(m, self.schedule, z0)?);
        Ok(self)
    }
}

/// Predicted n-th root rate for `f` with nearest singularity `z0`, the
/// level function of the schedule's charges at the ends of the support.
pub fn predicted_rate(m: &RecurrenceMeasure, schedule: Schedule, z0: Complex64) -> Result<f64> {
    let (lo, hi) = m.support();
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::Unsupported(
            "predicted rates need a compact support".into(),
        ));
    }
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let w = (z0 - Complex64::new(mid, 0.0)) / half;
    let spec = potential::solve_support(-1.0, schedule.alpha, 1.0, schedule.beta)?;
    Ok(spec.predicted_rate(w))
}

fn endpoint(bound: f64, order: usize) -> Result<f64> {
    if order > 0 && !bound.is_finite() {
        return Err(Error::domain(
            "schedule asks for derivatives at an infinite endpoint",
        ));
    }
    Ok(bound)
}

/// Rule used by the study at a given `n`.
pub fn study_rule(
    m: &RecurrenceMeasure,
    schedule: Schedule,
    n: usize,
    precision: Option<Precision>,
) -> Result<GenGaussRule> {
    let (lo, hi) = m.support();
    let (r, s) = schedule.orders(n);
    let a = endpoint(lo, r)?;
    let b = endpoint(hi, s)?;
    let precision = precision.unwrap_or_else(|| Precision::auto(r, s));
    rulegen::build_rule_with(m, a, r, b, s, n, precision)
}

/// `eps * norm_estimate * max |f|` over the sampled points of the rule.
pub fn roundoff_floor(rule: &GenGaussRule, f: &dyn Integrand) -> Result<f64> {
    let mut max_f = 0.0f64;
    for &t in &rule.nodes {
        max_f = max_f.max(f.value(t)?.abs());
    }
    for (order, at) in [(rule.r, rule.a), (rule.s, rule.b)] {
        if let (true, Some(x)) = (order > 0, at) {
            max_f = max_f.max(f.value(x)?.abs());
        }
    }
    Ok(f64::EPSILON * quadrature::norm_estimate(rule) * max_f)
}

fn study_row(
    m: &RecurrenceMeasure,
    f: &dyn Integrand,
    exact: f64,
    schedule: Schedule,
    n: usize,
    precision: Option<Precision>,
) -> Result<RateRow> {
    let rule = study_rule(m, schedule, n, precision)?;
    let error = quadrature::remainder(&rule, f, exact)?;
    Ok(RateRow {
        n,
        r: rule.r,
        s: rule.s,
        abs_error: error.abs(),
        roundoff_floor: roundoff_floor(&rule, f)?,
    })
}

fn error_rows(
    m: &RecurrenceMeasure,
    f: &dyn Integrand,
    exact: f64,
    schedule: Schedule,
    n_range: RangeInclusive<usize>,
    precision: Option<Precision>,
) -> Result<Vec<RateRow>> {
    n_range
        .into_par_iter()
        .map(|n| study_row(m, f, exact, schedule, n, precision))
        .collect()
}

fn exact_or_reference(m: &RecurrenceMeasure, f: &dyn Integrand, exact: Option<f64>) -> Result<f64> {
    match exact {
        Some(value) => Ok(value),
        None => quadrature::reference_integral(m, f),
    }
}

/// Least-squares slope of `log |R_n|` against `n`, exponentiated.
pub fn fit_rate(rows: &[RateRow]) -> Option<f64> {
    if rows.len() < 2 {
        return None;
    }
    let k = rows.len() as f64;
    let mean_n = rows.iter().map(|row| row.n as f64).sum::<f64>() / k;
    let mean_y = rows.iter().map(|row| row.abs_error.ln()).sum::<f64>() / k;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for row in rows {
        let dx = row.n as f64 - mean_n;
        sxy += dx * (row.abs_error.ln() - mean_y);
        sxx += dx * dx;
    }
    (sxx > 0.0).then(|| (sxy / sxx).exp())
}

/// The contiguous run of rows used for the fit: after the two smallest
/// `n`, up to the first row within the floor margin.
pub fn fit_rows(rows: &[RateRow]) -> &[RateRow] {
    let tail = rows.get(SKIPPED_LEADING..).unwrap_or(&[]);
    let end = tail
        .iter()
        .position(|row| !row.above_floor())
        .unwrap_or(tail.len());
    &tail[..end]
}

fn summarize(schedule: Schedule, rows: Vec<RateRow>) -> RateStudy {
    let window = fit_rows(&rows);
    let saturated = window.is_empty();
    let fitted_rate = fit_rate(window);
    let fit_window = fitted_rate.map(|_| (window[0].n, window[window.len() - 1].n));
    let roundoff_floor = rows
        .iter()
        .map(|row| row.roundoff_floor)
        .fold(0.0, f64::max);
    RateStudy {
        schedule,
        rows,
        fitted_rate,
        predicted_rate: None,
        roundoff_floor,
        saturated,
        fit_window,
    }
}

/// Rate study with automatic precision.
pub fn rate_study(
    m: &RecurrenceMeasure,
    f: &dyn Integrand,
    exact: Option<f64>,
    schedule: Schedule,
    n_range: RangeInclusive<usize>,
) -> Result<RateStudy> {
    rate_study_with(m, f, exact, schedule, n_range, None)
}

/// Rate study; `precision = None` picks double-double per `n` when
/// `r_n + s_n` is large.
pub fn rate_study_with(
    m: &RecurrenceMeasure,
    f: &dyn Integrand,
    exact: Option<f64>,
    schedule: Schedule,
    n_range: RangeInclusive<usize>,
    precision: Option<Precision>,
) -> Result<RateStudy> {
    if n_range.is_empty() {
        return Err(Error::domain("empty range of n"));
    }
    let exact = exact_or_reference(m, f, exact)?;
    let rows = error_rows(m, f, exact, schedule, n_range, precision)?;
    Ok(summarize(schedule, rows))
}

/// Median of `|R_{n+1}| / |R_n|` over consecutive nonzero errors.
pub fn median_ratio(errors: &[f64]) -> Option<f64> {
    let mut ratios: Vec<f64> = errors
        .windows(2)
        .filter(|w| w[0] > 0.0 && w[1] > 0.0)
        .map(|w| w[1] / w[0])
        .collect();
    if ratios.is_empty() {
        return None;
    }
    ratios.sort_by(f64::total_cmp);
    let mid = ratios.len() / 2;
    Some(if ratios.len() % 2 == 1 {
        ratios[mid]
    } else {
        0.5 * (ratios[mid - 1] + ratios[mid])
    })
}

/// Outcome of a fixed `(r, s)` convergence run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CqReport {
    pub r: usize,
    pub s: usize,
    pub errors: Vec<f64>,
    pub median_ratio: Option<f64>,
    pub final_error: f64,
    pub converged: bool,
}

/// Runs `n = 1..=n_max` at fixed `(r, s)` on the ends of the support.
pub fn cq_convergence_report(
    m: &RecurrenceMeasure,
    f: &dyn Integrand,
    exact: Option<f64>,
    r: usize,
    s: usize,
    n_max: usize,
    tolerance: f64,
) -> Result<CqReport> {
    if n_max == 0 {
        return Err(Error::domain("n_max must be at least 1"));
    }
    let exact = exact_or_reference(m, f, exact)?;
    let (lo, hi) = m.support();
    let (a, b) = (endpoint(lo, r)?, endpoint(hi, s)?);
    let errors = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let rule = rulegen::build_rule(m, a, r, b, s, n)?;
            Ok(quadrature::remainder(&rule, f, exact)?.abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    let median_ratio = median_ratio(&errors);
    let final_error = errors[errors.len() - 1];
    let trend_down = median_ratio.is_none_or(|q| q < 1.0);
    Ok(CqReport {
        r,
        s,
        median_ratio,
        final_error,
        converged: final_error < tolerance && trend_down,
        errors,
    })
}

/// True when `|R_n|` ends below `tolerance` with a decreasing trend.
pub fn cq_convergence_check(
    m: &RecurrenceMeasure,
    f: &dyn Integrand,
    exact: Option<f64>,
    r: usize,
    s: usize,
    n_max: usize,
    tolerance: f64,
) -> Result<bool> {
    Ok(cq_convergence_report(m, f, exact, r, s, n_max, tolerance)?.converged)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnrichmentRow {
    pub schedule: Schedule,
    pub fitted_rate: Option<f64>,
    pub predicted_rate: Option<f64>,
}

/// One study per schedule, sorted by fitted rate (unfitted rows last).
pub fn endpoint_enrichment_comparison(
    m: &RecurrenceMeasure,
    f: &dyn Integrand,
    exact: Option<f64>,
    schedules: &[Schedule],
    n_range: RangeInclusive<usize>,
    singularity: Option<Complex64>,
) -> Result<Vec<EnrichmentRow>> {
    let exact = exact_or_reference(m, f, exact)?;
    let mut table = schedules
        .iter()
        .map(|&schedule| {
            let mut study = rate_study(m, f, Some(exact), schedule, n_range.clone())?;
            if let Some(z0) = singularity {
                study = study.with_prediction(m, z0)?;
            }
            Ok(EnrichmentRow {
                schedule,
                fitted_rate: study.fitted_rate,
                predicted_rate: study.predicted_rate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    table.sort_by(|x, y| match (x.fitted_rate, y.fitted_rate) {
        (Some(p), Some(q)) => p.total_cmp(&q),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    Ok(table)
}
