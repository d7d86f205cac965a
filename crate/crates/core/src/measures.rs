//! Positive measures encoded by three-term recurrence coefficients.
//!
//! A [`RecurrenceMeasure`] stores monic recurrence coefficients
//! `pi_{k+1}(t) = (t - alpha_k) pi_k(t) - beta_k pi_{k-1}(t)` with
//! `beta_0` the total mass. Coefficients are generated up to a fixed
//! capacity at construction; asking for more is a [`Error::Capacity`]
//! error, never an extrapolation.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::tridiag;

/// Number of coefficients generated by the closed-form constructors.
pub const DEFAULT_CAPACITY: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Family {
    Jacobi { p: f64, q: f64 },
    Laguerre { p: f64 },
    Tabulated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceMeasure {
    label: String,
    support_lo: f64,
    support_hi: f64,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    family: Family,
}

/// Which way a linear Christoffel factor points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// multiply by `t - c`, requires `c <= support_lo`
    Above,
    /// multiply by `c - t`, requires `c >= support_hi`
    Below,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlainGaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub degree_exact: usize,
}

impl PlainGaussRule {
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    pub fn try_integrate(&self, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(x)?;
        }
        Ok(acc)
    }
}

impl RecurrenceMeasure {
    /// Builds a measure from explicit coefficients, validating positivity.
    pub fn from_coefficients(
        label: impl Into<String>,
        support_lo: f64,
        support_hi: f64,
        alpha: Vec<f64>,
        beta: Vec<f64>,
    ) -> Result<Self> {
        if alpha.len() != beta.len() || alpha.is_empty() {
            return Err(Error::domain(
                "alpha and beta must be non-empty and of equal length",
            ));
        }
        if support_lo.is_nan() || support_hi.is_nan() || support_lo >= support_hi {
            return Err(Error::domain("support must be a non-degenerate interval"));
        }
        if support_lo == f64::INFINITY || support_hi == f64::NEG_INFINITY {
            return Err(Error::domain("support bounds point the wrong way"));
        }
        if let Some(k) = beta.iter().position(|&b| !(b > 0.0) || !b.is_finite()) {
            return Err(Error::domain(format!(
                "beta_{k} = {} is not positive",
                beta[k]
            )));
        }
        if alpha.iter().any(|a| !a.is_finite()) {
            return Err(Error::domain("alpha coefficients must be finite"));
        }
        Ok(RecurrenceMeasure {
            label: label.into(),
            support_lo,
            support_hi,
            alpha,
            beta,
            family: Family::Tabulated,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn support(&self) -> (f64, f64) {
        (self.support_lo, self.support_hi)
    }

    pub fn is_unbounded_left(&self) -> bool {
        self.support_lo.is_infinite()
    }

    pub fn is_unbounded_right(&self) -> bool {
        self.support_hi.is_infinite()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// Number of stored `(alpha_k, beta_k)` pairs.
    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.beta[0]
    }

    /// True for the Lebesgue measure on `[-1, 1]`.
    pub fn is_lebesgue(&self) -> bool {
        matches!(self.family, Family::Jacobi { p, q } if p == 0.0 && q == 0.0)
    }

    /// Regenerates a closed-form measure with a different capacity.
    pub fn with_capacity(&self, len: usize) -> Result<Self> {
        match self.family {
            Family::Jacobi { p, q } => jacobi_measure_with_capacity(p, q, len),
            Family::Laguerre { p } => laguerre_measure_with_capacity(p, len),
            Family::Tabulated if len <= self.len() => {
                let mut m = self.clone();
                m.alpha.truncate(len);
                m.beta.truncate(len);
                Ok(m)
            }
            Family::Tabulated => Err(Error::Capacity {
                needed: len,
                available: self.len(),
            }),
        }
    }

    /// First `len` coefficient pairs in the requested arithmetic.
    ///
    /// Closed-form families are re-evaluated in `T`; tabulated measures are
    /// widened from their stored binary64 values.
    pub(crate) fn coefficients<T: Real>(&self, len: usize) -> Result<(Vec<T>, Vec<T>)> {
        match self.family {
            Family::Jacobi { p, q } => Ok(jacobi_coefficients(p, q, len)),
            Family::Laguerre { p } => Ok(laguerre_coefficients(p, len)),
            Family::Tabulated => {
                if len > self.len() {
                    return Err(Error::Capacity {
                        needed: len,
                        available: self.len(),
                    });
                }
                Ok((
                    self.alpha[..len].iter().map(|&x| T::from_f64(x)).collect(),
                    self.beta[..len].iter().map(|&x| T::from_f64(x)).collect(),
                ))
            }
        }
    }

    fn require(&self, len: usize) -> Result<()> {
        if len > self.len() {
            Err(Error::Capacity {
                needed: len,
                available: self.len(),
            })
        } else {
            Ok(())
        }
    }
}

fn jacobi_mass(p: f64, q: f64) -> f64 {
    ((p + q + 1.0) * std::f64::consts::LN_2 + ln_gamma(p + 1.0) + ln_gamma(q + 1.0)
        - ln_gamma(p + q + 2.0))
    .exp()
}

fn jacobi_coefficients<T: Real>(p: f64, q: f64, len: usize) -> (Vec<T>, Vec<T>) {
    let (pt, qt) = (T::from_f64(p), T::from_f64(q));
    let one = T::one();
    let two = T::from_f64(2.0);
    let four = T::from_f64(4.0);
    let mut alpha = Vec::with_capacity(len);
    let mut beta = Vec::with_capacity(len);
    for k in 0..len {
        let kt = T::from_usize(k);
        let s = two * kt + pt + qt;
        if k == 0 {
            alpha.push((qt - pt) / (pt + qt + two));
            beta.push(T::from_f64(jacobi_mass(p, q)));
        } else {
            alpha.push((qt * qt - pt * pt) / (s * (s + two)));
            if k == 1 {
                // closed form with the (k + p + q) / (s - 1) factor cancelled
                beta.push(
                    four * (one + pt) * (one + qt)
                        / ((two + pt + qt) * (two + pt + qt) * (T::from_f64(3.0) + pt + qt)),
                );
            } else {
                beta.push(
                    four * kt * (kt + pt) * (kt + qt) * (kt + pt + qt)
                        / (s * s * (s + one) * (s - one)),
                );
            }
        }
    }
    (alpha, beta)
}

fn laguerre_coefficients<T: Real>(p: f64, len: usize) -> (Vec<T>, Vec<T>) {
    let pt = T::from_f64(p);
    let alpha = (0..len).map(|k| T::from_usize(2 * k + 1) + pt).collect();
    let beta = (0..len)
        .map(|k| {
            if k == 0 {
                T::from_f64(ln_gamma(p + 1.0).exp())
            } else {
                let kt = T::from_usize(k);
                kt * (kt + pt)
            }
        })
        .collect();
    (alpha, beta)
}

/// Jacobi measure `(1-t)^p (1+t)^q dt` on `[-1, 1]`.
pub fn jacobi_measure(p: f64, q: f64) -> Result<RecurrenceMeasure> {
    jacobi_measure_with_capacity(p, q, DEFAULT_CAPACITY)
}

pub fn jacobi_measure_with_capacity(p: f64, q: f64, len: usize) -> Result<RecurrenceMeasure> {
    if !(p > -1.0) || !(q > -1.0) || !p.is_finite() || !q.is_finite() {
        return Err(Error::domain(format!(
            "Jacobi parameters must exceed -1, got ({p}, {q})"
        )));
    }
    let len = len.max(1);
    let (alpha, beta) = jacobi_coefficients::<f64>(p, q, len);
    Ok(RecurrenceMeasure {
        label: format!("jacobi:{p},{q}"),
        support_lo: -1.0,
        support_hi: 1.0,
        alpha,
        beta,
        family: Family::Jacobi { p, q },
    })
}

/// Generalized Laguerre measure `t^p e^{-t} dt` on `[0, inf)`.
pub fn laguerre_measure(p: f64) -> Result<RecurrenceMeasure> {
    laguerre_measure_with_capacity(p, DEFAULT_CAPACITY)
}

pub fn laguerre_measure_with_capacity(p: f64, len: usize) -> Result<RecurrenceMeasure> {
    if !(p > -1.0) || !p.is_finite() {
        return Err(Error::domain(format!(
            "Laguerre parameter must exceed -1, got {p}"
        )));
    }
    let len = len.max(1);
    let (alpha, beta) = laguerre_coefficients::<f64>(p, len);
    Ok(RecurrenceMeasure {
        label: format!("laguerre:{p}"),
        support_lo: 0.0,
        support_hi: f64::INFINITY,
        alpha,
        beta,
        family: Family::Laguerre { p },
    })
}

/// Golub-Welsch Gauss rule with `n` points.
pub fn gauss_rule(m: &RecurrenceMeasure, n: usize) -> Result<PlainGaussRule> {
    if n == 0 {
        return Err(Error::domain("Gauss rule needs at least one node"));
    }
    m.require(n)?;
    let (nodes, weights) = tridiag::gauss_nodes_weights(&m.alpha, &m.beta, n)?;
    Ok(PlainGaussRule {
        nodes,
        weights,
        degree_exact: 2 * n - 1,
    })
}

pub(crate) fn check_factor(m: &RecurrenceMeasure, c: f64, orientation: Orientation) -> Result<()> {
    if !c.is_finite() {
        return Err(Error::domain("Christoffel factor root must be finite"));
    }
    let ok = match orientation {
        Orientation::Above => c <= m.support_lo,
        Orientation::Below => c >= m.support_hi,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "linear factor with root {c} changes sign on the support [{}, {}]",
            m.support_lo, m.support_hi
        )))
    }
}

/// Multiplies the measure by `t - c` (or `c - t`).
///
/// The result has one coefficient fewer than `m`.
pub fn christoffel_modify(
    m: &RecurrenceMeasure,
    c: f64,
    orientation: Orientation,
) -> Result<RecurrenceMeasure> {
    check_factor(m, c, orientation)?;
    if m.len() < 2 {
        return Err(Error::Capacity {
            needed: 2,
            available: m.len(),
        });
    }
    let (alpha, beta) =
        tridiag::christoffel_linear(&m.alpha, &m.beta, c, orientation == Orientation::Above);
    let sign = match orientation {
        Orientation::Above => "t-",
        Orientation::Below => "-t+",
    };
    RecurrenceMeasure::from_coefficients(
        format!("({sign}{c})*{}", m.label),
        m.support_lo,
        m.support_hi,
        alpha,
        beta,
    )
}

pub(crate) fn check_modification(
    m: &RecurrenceMeasure,
    a: f64,
    r: usize,
    b: f64,
    s: usize,
) -> Result<()> {
    if r > 0 {
        if m.is_unbounded_left() {
            return Err(Error::domain(
                "left multiplicity must be 0 on a support unbounded to the left",
            ));
        }
        if !a.is_finite() {
            return Err(Error::domain(
                "left multiplicity r > 0 needs a finite endpoint a",
            ));
        }
        check_factor(m, a, Orientation::Above)?;
    }
    if s > 0 {
        if m.is_unbounded_right() {
            return Err(Error::domain(
                "right multiplicity must be 0 on a support unbounded to the right",
            ));
        }
        if !b.is_finite() {
            return Err(Error::domain(
                "right multiplicity s > 0 needs a finite endpoint b",
            ));
        }
        check_factor(m, b, Orientation::Below)?;
    }
    Ok(())
}

/// Coefficients of `(t-a)^r (b-t)^s dm` in arithmetic `T`, at least `len` long.
///
/// Left and right factors alternate, left first, until one side runs out.
pub(crate) fn modified_coefficients<T: Real>(
    m: &RecurrenceMeasure,
    a: f64,
    r: usize,
    b: f64,
    s: usize,
    len: usize,
) -> Result<(Vec<T>, Vec<T>)> {
    check_modification(m, a, r, b, s)?;
    let (mut alpha, mut beta) = m.coefficients::<T>(len + r + s)?;
    let (at, bt) = (T::from_f64(a), T::from_f64(b));
    let (mut left, mut right) = (r, s);
    while left + right > 0 {
        if left > 0 {
            let (na, nb) = tridiag::christoffel_linear(&alpha, &beta, at, true);
            alpha = na;
            beta = nb;
            left -= 1;
        }
        if right > 0 {
            let (na, nb) = tridiag::christoffel_linear(&alpha, &beta, bt, false);
            alpha = na;
            beta = nb;
            right -= 1;
        }
    }
    Ok((alpha, beta))
}

/// The measure `(t-a)^r (b-t)^s dm(t)`.
pub fn modified_measure(
    m: &RecurrenceMeasure,
    a: f64,
    r: usize,
    b: f64,
    s: usize,
) -> Result<RecurrenceMeasure> {
    if r + s == 0 {
        return Ok(m.clone());
    }
    check_modification(m, a, r, b, s)?;
    if m.len() <= r + s {
        return Err(Error::Capacity {
            needed: r + s + 1,
            available: m.len(),
        });
    }
    let len = m.len() - r - s;
    let (alpha, beta) = modified_coefficients::<f64>(m, a, r, b, s, len)?;
    RecurrenceMeasure::from_coefficients(
        format!("(t-{a})^{r}(-t+{b})^{s}*{}", m.label),
        m.support_lo,
        m.support_hi,
        alpha,
        beta,
    )
}

const STIELTJES_MIN_POINTS: usize = 64;
const STIELTJES_MAX_POINTS: usize = 4096;
const STIELTJES_TOL: f64 = 1e-10;

/// Recurrence coefficients `0..=k_max` of `f(t) dt` on `[lo, hi]` by the
/// discretized Stieltjes procedure on Gauss-Legendre points.
///
/// The discretization is doubled until successive coefficient sets agree
/// to `1e-10` relative.
pub fn stieltjes_from_density<F>(
    density: F,
    lo: f64,
    hi: f64,
    k_max: usize,
) -> Result<RecurrenceMeasure>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::domain(
            "density support must be a finite interval lo < hi",
        ));
    }
    let len = k_max + 1;
    let mut points = STIELTJES_MIN_POINTS.max(4 * len);
    let mut previous = discretized_stieltjes(&density, lo, hi, len, points)?;
    loop {
        points *= 2;
        if points > STIELTJES_MAX_POINTS {
            return Err(Error::numeric(format!(
                "discretized Stieltjes procedure did not converge with {STIELTJES_MAX_POINTS} points"
            )));
        }
        let next = discretized_stieltjes(&density, lo, hi, len, points)?;
        let scale = (hi - lo).max(lo.abs()).max(hi.abs());
        let settled = (0..len).all(|k| {
            (next.0[k] - previous.0[k]).abs() <= STIELTJES_TOL * scale
                && (next.1[k] - previous.1[k]).abs() <= STIELTJES_TOL * next.1[k].abs()
        });
        previous = next;
        if settled {
            break;
        }
    }
    RecurrenceMeasure::from_coefficients("density", lo, hi, previous.0, previous.1)
}

fn discretized_stieltjes<F>(
    density: &F,
    lo: f64,
    hi: f64,
    len: usize,
    points: usize,
) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(f64) -> Result<f64>,
{
    let legendre = jacobi_measure_with_capacity(0.0, 0.0, points)?;
    let base = gauss_rule(&legendre, points)?;
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let mut xs = Vec::with_capacity(points);
    let mut ws = Vec::with_capacity(points);
    for (&u, &w) in base.nodes.iter().zip(&base.weights) {
        let x = mid + half * u;
        let rho = density(x)?;
        if rho < 0.0 || rho.is_nan() {
            return Err(Error::domain(format!(
                "density is negative ({rho:e}) at t = {x}"
            )));
        }
        xs.push(x);
        ws.push(w * half * rho);
    }
    let mass: f64 = ws.iter().sum();
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(Error::domain("density has zero or non-finite mass"));
    }

    // orthonormal Stieltjes sweep
    let mut alpha = Vec::with_capacity(len);
    let mut beta = Vec::with_capacity(len);
    beta.push(mass);
    let mut prev = vec![0.0; points];
    let mut cur = vec![1.0 / mass.sqrt(); points];
    for k in 0..len {
        let a_k: f64 = (0..points).map(|i| ws[i] * xs[i] * cur[i] * cur[i]).sum();
        alpha.push(a_k);
        if k + 1 == len {
            break;
        }
        let sqrt_bk = if k == 0 { 0.0 } else { beta[k].sqrt() };
        let next: Vec<f64> = (0..points)
            .map(|i| (xs[i] - a_k) * cur[i] - sqrt_bk * prev[i])
            .collect();
        let b_next: f64 = (0..points).map(|i| ws[i] * next[i] * next[i]).sum();
        if !(b_next > 0.0) {
            return Err(Error::domain(format!(
                "density has too few points of increase for {len} coefficients"
            )));
        }
        beta.push(b_next);
        let norm = b_next.sqrt();
        prev = cur;
        cur = next.into_iter().map(|v| v / norm).collect();
    }
    Ok((alpha, beta))
}

/// JSON form: `{label, support:[lo,hi|"inf"], alpha:[...], beta:[...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureJson {
    pub label: String,
    pub support: [Bound; 2],
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

/// A support endpoint; infinite ends serialize as `"inf"` / `"-inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bound {
    Finite(f64),
    Infinite(InfTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InfTag {
    #[serde(rename = "inf")]
    Pos,
    #[serde(rename = "-inf")]
    Neg,
}

impl Bound {
    fn from_f64(x: f64) -> Self {
        if x == f64::INFINITY {
            Bound::Infinite(InfTag::Pos)
        } else if x == f64::NEG_INFINITY {
            Bound::Infinite(InfTag::Neg)
        } else {
            Bound::Finite(x)
        }
    }

    fn to_f64(self) -> f64 {
        match self {
            Bound::Finite(x) => x,
            Bound::Infinite(InfTag::Pos) => f64::INFINITY,
            Bound::Infinite(InfTag::Neg) => f64::NEG_INFINITY,
        }
    }
}

impl From<&RecurrenceMeasure> for MeasureJson {
    fn from(m: &RecurrenceMeasure) -> Self {
        MeasureJson {
            label: m.label.clone(),
            support: [Bound::from_f64(m.support_lo), Bound::from_f64(m.support_hi)],
            alpha: m.alpha.clone(),
            beta: m.beta.clone(),
        }
    }
}

impl TryFrom<MeasureJson> for RecurrenceMeasure {
    type Error = Error;

    fn try_from(j: MeasureJson) -> Result<Self> {
        RecurrenceMeasure::from_coefficients(
            j.label,
            j.support[0].to_f64(),
            j.support[1].to_f64(),
            j.alpha,
            j.beta,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_coefficients() {
        let m = jacobi_measure(0.0, 0.0).unwrap();
        assert!(m.alpha()[..20].iter().all(|&a| a == 0.0));
        assert_relative_eq!(m.beta()[0], 2.0, max_relative = 1e-15);
        assert_relative_eq!(m.beta()[1], 1.0 / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn jacobi_mirror_negates_alpha() {
        let m = jacobi_measure(0.5, -0.3).unwrap();
        let w = jacobi_measure(-0.3, 0.5).unwrap();
        for k in 0..30 {
            assert_relative_eq!(m.alpha()[k], -w.alpha()[k], epsilon = 1e-15);
            assert_relative_eq!(m.beta()[k], w.beta()[k], max_relative = 1e-14);
        }
    }

    #[test]
    fn jacobi_mass_one_one() {
        let m = jacobi_measure(1.0, 1.0).unwrap();
        assert_relative_eq!(m.total_mass(), 4.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn chebyshev_first_kind_edge_case() {
        // p + q = -1 exercises the cancelled beta_1 formula
        let m = jacobi_measure(-0.5, -0.5).unwrap();
        assert_relative_eq!(m.total_mass(), std::f64::consts::PI, max_relative = 1e-14);
        assert_relative_eq!(m.beta()[1], 0.5, max_relative = 1e-14);
        assert_relative_eq!(m.beta()[2], 0.25, max_relative = 1e-14);
    }

    #[test]
    fn parameter_domain() {
        assert!(matches!(jacobi_measure(-1.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(laguerre_measure(-1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn laguerre_coefficients_and_mass() {
        let m = laguerre_measure(0.0).unwrap();
        for k in 0..10 {
            assert_eq!(m.alpha()[k], (2 * k + 1) as f64);
        }
        assert_relative_eq!(m.beta()[0], 1.0, max_relative = 1e-15);
        assert_eq!(m.beta()[3], 9.0);
        assert_relative_eq!(
            laguerre_measure(1.0).unwrap().total_mass(),
            1.0,
            max_relative = 1e-14
        );
        assert!(m.is_unbounded_right());
    }

    #[test]
    fn gauss_rule_examples() {
        let leg = jacobi_measure(0.0, 0.0).unwrap();
        let g1 = gauss_rule(&leg, 1).unwrap();
        assert_eq!(g1.nodes, vec![0.0]);
        assert_relative_eq!(g1.weights[0], 2.0, max_relative = 1e-15);
        let g2 = gauss_rule(&leg, 2).unwrap();
        assert_relative_eq!(g2.nodes[1], 0.5773502691896258, max_relative = 1e-15);
        assert_relative_eq!(g2.weights[0], 1.0, max_relative = 1e-14);
        let lag = laguerre_measure(0.0).unwrap();
        let g = gauss_rule(&lag, 1).unwrap();
        assert_relative_eq!(g.nodes[0], 1.0, max_relative = 1e-15);
        assert_relative_eq!(g.weights[0], 1.0, max_relative = 1e-15);
    }

    #[test]
    fn gauss_rule_capacity() {
        let m = jacobi_measure_with_capacity(0.0, 0.0, 5).unwrap();
        assert!(matches!(
            gauss_rule(&m, 6),
            Err(Error::Capacity {
                needed: 6,
                available: 5
            })
        ));
    }

    #[test]
    fn christoffel_to_jacobi_one_one() {
        let leg = jacobi_measure_with_capacity(0.0, 0.0, 40).unwrap();
        let once = christoffel_modify(&leg, -1.0, Orientation::Above).unwrap();
        let twice = christoffel_modify(&once, 1.0, Orientation::Below).unwrap();
        let j11 = jacobi_measure(1.0, 1.0).unwrap();
        assert_eq!(twice.len(), 38);
        for k in 0..38 {
            assert!((twice.alpha()[k] - j11.alpha()[k]).abs() < 1e-12);
            assert_relative_eq!(twice.beta()[k], j11.beta()[k], max_relative = 1e-12);
        }
    }

    #[test]
    fn christoffel_far_factor_is_nearly_identity() {
        let leg = jacobi_measure_with_capacity(0.0, 0.0, 20).unwrap();
        let far = christoffel_modify(&leg, -1e6, Orientation::Above).unwrap();
        for k in 1..15 {
            assert!((far.alpha()[k] - leg.alpha()[k]).abs() < 1e-4);
            assert!((far.beta()[k] - leg.beta()[k]).abs() < 1e-4);
        }
    }

    #[test]
    fn christoffel_laguerre_shift() {
        let lag = laguerre_measure_with_capacity(0.0, 30).unwrap();
        let m = christoffel_modify(&lag, 0.0, Orientation::Above).unwrap();
        let l1 = laguerre_measure(1.0).unwrap();
        for k in 0..25 {
            assert_relative_eq!(m.alpha()[k], l1.alpha()[k], max_relative = 1e-12);
            assert_relative_eq!(m.beta()[k], l1.beta()[k], max_relative = 1e-12);
        }
    }

    #[test]
    fn christoffel_rejects_sign_change() {
        let leg = jacobi_measure(0.0, 0.0).unwrap();
        assert!(matches!(
            christoffel_modify(&leg, 0.0, Orientation::Above),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            christoffel_modify(&leg, 0.5, Orientation::Below),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn modified_measure_examples() {
        let leg = jacobi_measure_with_capacity(0.0, 0.0, 40).unwrap();
        assert_eq!(modified_measure(&leg, -1.0, 0, 1.0, 0).unwrap(), leg);
        for (r, target) in [(1usize, 1.0), (2, 2.0)] {
            let m = modified_measure(&leg, -1.0, r, 1.0, r).unwrap();
            let j = jacobi_measure(target, target).unwrap();
            for k in 0..30 {
                assert!((m.alpha()[k] - j.alpha()[k]).abs() < 1e-12);
                assert_relative_eq!(m.beta()[k], j.beta()[k], max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn modified_measure_unbounded_side() {
        let lag = laguerre_measure(0.0).unwrap();
        assert!(matches!(
            modified_measure(&lag, 0.0, 0, 5.0, 1),
            Err(Error::Domain(_))
        ));
        assert!(modified_measure(&lag, 0.0, 2, f64::INFINITY, 0).is_ok());
    }

    #[test]
    fn stieltjes_examples() {
        let m = stieltjes_from_density(|_| Ok(1.0), -1.0, 1.0, 12).unwrap();
        let leg = jacobi_measure(0.0, 0.0).unwrap();
        for k in 0..=12 {
            assert!(m.alpha()[k].abs() < 1e-13);
            assert_relative_eq!(m.beta()[k], leg.beta()[k], max_relative = 1e-12);
        }
        let m = stieltjes_from_density(|t| Ok(1.0 - t * t), -1.0, 1.0, 10).unwrap();
        let j = jacobi_measure(1.0, 1.0).unwrap();
        for k in 0..=10 {
            assert_relative_eq!(m.beta()[k], j.beta()[k], max_relative = 1e-12);
        }
        let m = stieltjes_from_density(|t| Ok((-t).exp()), 0.0, 100.0, 10).unwrap();
        let lag = laguerre_measure(0.0).unwrap();
        for k in 0..=10 {
            assert_relative_eq!(m.alpha()[k], lag.alpha()[k], max_relative = 1e-8);
            assert_relative_eq!(
                m.beta()[k],
                lag.beta()[k],
                max_relative = 1e-8,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn stieltjes_rejects_negative_density() {
        let err = stieltjes_from_density(Ok, -1.0, 1.0, 4).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn json_round_trip_keeps_infinite_support() {
        let lag = laguerre_measure_with_capacity(0.5, 6).unwrap();
        let text = serde_json::to_string(&MeasureJson::from(&lag)).unwrap();
        assert!(text.contains("\"inf\""));
        let back: MeasureJson = serde_json::from_str(&text).unwrap();
        let m = RecurrenceMeasure::try_from(back).unwrap();
        assert!(m.is_unbounded_right());
        assert_eq!(m.alpha(), lag.alpha());
    }
}
