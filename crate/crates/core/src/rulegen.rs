//! Construction of the generalized Gauss-Radau / Gauss-Lobatto rule
//!
//! ```text
//! Q(f) = sum_{j<r} L_j f^(j)(a) + sum_{k=1..n} w_k f(t_k) + sum_{j<s} (-1)^j R_j f^(j)(b)
//! ```
//!
//! exact on polynomials of degree `2n + r + s - 1`. The free nodes are the
//! Gauss nodes of `(t-a)^r (b-t)^s dlambda`. Every weight is obtained as the
//! integral of its Hermite-Lagrange basis polynomial against `dlambda`,
//! using an auxiliary Gauss rule of the unmodified measure that is exact
//! for the basis degree. The boundary basis polynomials are
//!
//! ```text
//! P_j(t) = (t-a)^j / j! * Omega_{r-j-1}(t) * omega(t),   omega(t) = (b-t)^s prod (t_k - t)^2
//! ```
//!
//! with `Omega_m` the degree-`m` Taylor partial sum of `1/omega` at `a`.
//! The Taylor coefficients of `1/omega` are all positive, so `P_j >= 0` on
//! `[a, b]` and every boundary weight is a sum of non-negative terms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{self, RecurrenceMeasure};
use crate::real::{DoubleDouble, Precision, Real};
use crate::tridiag;

/// Generalized Gauss rule. `a`/`b` are `None` only on an unbounded side.
///
/// `right_weights` hold the positive numbers `R_j`; the factor `(-1)^j`
/// is applied when the rule is evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenGaussRule<T = f64> {
    pub a: Option<f64>,
    pub r: usize,
    pub b: Option<f64>,
    pub s: usize,
    pub n: usize,
    pub nodes: Vec<T>,
    pub interior_weights: Vec<T>,
    pub left_weights: Vec<T>,
    pub right_weights: Vec<T>,
    pub degree_exact: usize,
}

impl<T: Real> GenGaussRule<T> {
    pub fn to_f64(&self) -> GenGaussRule<f64> {
        let conv = |v: &[T]| v.iter().map(|x| x.to_f64()).collect::<Vec<f64>>();
        GenGaussRule {
            a: self.a,
            r: self.r,
            b: self.b,
            s: self.s,
            n: self.n,
            nodes: conv(&self.nodes),
            interior_weights: conv(&self.interior_weights),
            left_weights: conv(&self.left_weights),
            right_weights: conv(&self.right_weights),
            degree_exact: self.degree_exact,
        }
    }

    /// Evaluates the rule on plain derivatives `f^(j)(a)`, `f(t_k)`, `f^(j)(b)`.
    ///
    /// Slices must have lengths at least `r`, exactly `n`, and at least `s`.
    pub fn combine(&self, left_derivatives: &[T], values: &[T], right_derivatives: &[T]) -> T {
        let mut acc = T::zero();
        for (w, d) in self.left_weights.iter().zip(left_derivatives) {
            acc += *w * *d;
        }
        for (w, v) in self.interior_weights.iter().zip(values) {
            acc += *w * *v;
        }
        for (j, (w, d)) in self.right_weights.iter().zip(right_derivatives).enumerate() {
            if j % 2 == 0 {
                acc += *w * *d;
            } else {
                acc -= *w * *d;
            }
        }
        acc
    }

    /// Sum of all stored weights.
    pub fn weight_sum(&self) -> T {
        let mut acc = T::zero();
        for w in self
            .left_weights
            .iter()
            .chain(&self.interior_weights)
            .chain(&self.right_weights)
        {
            acc += *w;
        }
        acc
    }

    /// Smallest stored weight, `None` for an empty rule.
    pub fn min_weight(&self) -> Option<T> {
        self.left_weights
            .iter()
            .chain(&self.interior_weights)
            .chain(&self.right_weights)
            .copied()
            .reduce(|x, y| if y < x { y } else { x })
    }
}

/// Which interpolation condition a basis polynomial belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisSide {
    /// `j`-th derivative at `a`
    Left(usize),
    /// `j`-th derivative at `b`
    Right(usize),
    /// value at node `t_j`, 1-based
    Interior(usize),
}

/// Hermite-Lagrange basis polynomial kept in factored form.
///
/// Boundary polynomials store the normalized Taylor coefficients of
/// `omega(e) / omega` at their endpoint `e`; evaluation multiplies
/// non-negative factors and never touches monomial coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisPoly<T = f64> {
    side: BasisSide,
    a: T,
    b: T,
    r: usize,
    s: usize,
    nodes: Vec<T>,
    /// `1 / prod` of the normalization factors; `omega(e)` for boundary sides
    end_value: T,
    taylor: Vec<T>,
    inv_factorial: T,
    sign: T,
}

pub type HermiteBasisPoly = BasisPoly<f64>;

impl<T: Real> BasisPoly<T> {
    pub fn side(&self) -> BasisSide {
        self.side
    }

    pub fn degree(&self) -> usize {
        2 * self.nodes.len() + self.r + self.s
            - 1
            - match self.side {
                BasisSide::Interior(_) => 1,
                _ => 0,
            }
    }

    /// Value at `t` from the factored representation.
    pub fn eval(&self, t: T) -> T {
        match self.side {
            BasisSide::Left(j) => {
                let u = t - self.a;
                let mut value = u.powi(j as u32) * self.inv_factorial;
                value *= horner(&self.taylor, u);
                if self.s > 0 {
                    value *= ((self.b - t) / (self.b - self.a)).powi(self.s as u32);
                }
                for &x in &self.nodes {
                    let f = (x - t) / (x - self.a);
                    value *= f * f;
                }
                value
            }
            BasisSide::Right(j) => {
                let u = self.b - t;
                let mut value = u.powi(j as u32) * self.inv_factorial;
                value *= horner(&self.taylor, u);
                if self.r > 0 {
                    value *= ((t - self.a) / (self.b - self.a)).powi(self.r as u32);
                }
                for &x in &self.nodes {
                    let f = (x - t) / (self.b - x);
                    value *= f * f;
                }
                self.sign * value
            }
            BasisSide::Interior(j) => {
                let tj = self.nodes[j - 1];
                let mut value = T::one();
                if self.r > 0 {
                    value *= ((t - self.a) / (tj - self.a)).powi(self.r as u32);
                }
                if self.s > 0 {
                    value *= ((self.b - t) / (self.b - tj)).powi(self.s as u32);
                }
                for (k, &x) in self.nodes.iter().enumerate() {
                    if k + 1 != j {
                        let f = (x - t) / (x - tj);
                        value *= f * f;
                    }
                }
                value
            }
        }
    }

    /// `Omega_m(t)`, the Taylor partial sum of `1/omega` at the endpoint.
    /// Returns `None` for interior polynomials.
    pub fn omega_partial_sum(&self, t: T) -> Option<T> {
        let u = match self.side {
            BasisSide::Left(_) => t - self.a,
            BasisSide::Right(_) => self.b - t,
            BasisSide::Interior(_) => return None,
        };
        Some(horner(&self.taylor, u) / self.end_value)
    }

    /// Taylor coefficients of `1/omega` at the endpoint, orders `0..=m`.
    pub fn omega_taylor(&self) -> Vec<T> {
        self.taylor.iter().map(|&c| c / self.end_value).collect()
    }
}

impl BasisPoly<f64> {
    /// Monomial coefficients (ascending powers of `t`), for inspection only.
    pub fn monomial_coefficients(&self) -> Vec<f64> {
        let mut poly = vec![1.0];
        let mul_linear = |p: &Vec<f64>, c0: f64, c1: f64| {
            let mut out = vec![0.0; p.len() + 1];
            for (i, &v) in p.iter().enumerate() {
                out[i] += c0 * v;
                out[i + 1] += c1 * v;
            }
            out
        };
        let (a, b) = (self.a, self.b);
        match self.side {
            BasisSide::Left(j) => {
                for _ in 0..j {
                    poly = mul_linear(&poly, -a, 1.0);
                }
                let mut omega_sum = vec![0.0];
                let mut power = vec![1.0];
                for &c in &self.taylor {
                    for (i, &v) in power.iter().enumerate() {
                        if i >= omega_sum.len() {
                            omega_sum.push(0.0);
                        }
                        omega_sum[i] += c * v;
                    }
                    power = mul_linear(&power, -a, 1.0);
                }
                poly = poly_mul(&poly, &omega_sum);
                for _ in 0..self.s {
                    poly = mul_linear(&poly, b / (b - a), -1.0 / (b - a));
                }
                for &x in &self.nodes {
                    let d = x - a;
                    poly = mul_linear(&poly, x / d, -1.0 / d);
                    poly = mul_linear(&poly, x / d, -1.0 / d);
                }
                poly.iter().map(|c| c * self.inv_factorial).collect()
            }
            BasisSide::Right(j) => {
                for _ in 0..j {
                    poly = mul_linear(&poly, b, -1.0);
                }
                let mut omega_sum = vec![0.0];
                let mut power = vec![1.0];
                for &c in &self.taylor {
                    for (i, &v) in power.iter().enumerate() {
                        if i >= omega_sum.len() {
                            omega_sum.push(0.0);
                        }
                        omega_sum[i] += c * v;
                    }
                    power = mul_linear(&power, b, -1.0);
                }
                poly = poly_mul(&poly, &omega_sum);
                for _ in 0..self.r {
                    poly = mul_linear(&poly, -a / (b - a), 1.0 / (b - a));
                }
                for &x in &self.nodes {
                    let d = b - x;
                    poly = mul_linear(&poly, x / d, -1.0 / d);
                    poly = mul_linear(&poly, x / d, -1.0 / d);
                }
                poly.iter()
                    .map(|c| c * self.inv_factorial * self.sign)
                    .collect()
            }
            BasisSide::Interior(j) => {
                let tj = self.nodes[j - 1];
                for _ in 0..self.r {
                    poly = mul_linear(&poly, -a / (tj - a), 1.0 / (tj - a));
                }
                for _ in 0..self.s {
                    poly = mul_linear(&poly, b / (b - tj), -1.0 / (b - tj));
                }
                for (k, &x) in self.nodes.iter().enumerate() {
                    if k + 1 != j {
                        let d = x - tj;
                        poly = mul_linear(&poly, x / d, -1.0 / d);
                        poly = mul_linear(&poly, x / d, -1.0 / d);
                    }
                }
                poly
            }
        }
    }
}

fn poly_mul(p: &[f64], q: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + q.len() - 1];
    for (i, &x) in p.iter().enumerate() {
        for (j, &y) in q.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn horner<T: Real>(coeffs: &[T], u: T) -> T {
    coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * u + c)
}

fn factorial<T: Real>(j: usize) -> T {
    (1..=j).fold(T::one(), |acc, k| acc * T::from_usize(k))
}

/// First `order + 1` Taylor coefficients of `omega(e)/omega` where
/// `omega` is the product of `(d - u)^mult` over `(distance d, multiplicity)`
/// pairs, expanded in `u >= 0` away from the endpoint.
///
/// Uses logarithmic differentiation: `log(omega(e)/omega)` has
/// coefficients `h_l / l` with `h_l = sum mult * d^-l`, all positive.
fn normalized_reciprocal_taylor<T: Real>(factors: &[(T, usize)], order: usize) -> Vec<T> {
    let h: Vec<T> = (1..=order)
        .map(|l| {
            let mut acc = T::zero();
            for &(d, mult) in factors {
                acc += T::from_usize(mult) / d.powi(l as u32);
            }
            acc
        })
        .collect();
    let mut c = Vec::with_capacity(order + 1);
    c.push(T::one());
    for k in 1..=order {
        let mut acc = T::zero();
        for i in 1..=k {
            acc += h[i - 1] * c[k - i];
        }
        c.push(acc / T::from_usize(k));
    }
    c
}

/// First `m + 1` Taylor coefficients of `1/g` from those of `g`.
pub fn taylor_reciprocal(coeffs: &[f64], m: usize) -> Result<Vec<f64>> {
    taylor_reciprocal_in(coeffs, m)
}

pub(crate) fn taylor_reciprocal_in<T: Real>(coeffs: &[T], m: usize) -> Result<Vec<T>> {
    let head = *coeffs
        .first()
        .ok_or_else(|| Error::domain("empty series"))?;
    if head == T::zero() {
        return Err(Error::domain(
            "series with zero constant term has no reciprocal",
        ));
    }
    let mut out: Vec<T> = Vec::with_capacity(m + 1);
    out.push(T::one() / head);
    for k in 1..=m {
        let mut acc = T::zero();
        for i in 1..=k.min(coeffs.len() - 1) {
            acc += coeffs[i] * out[k - i];
        }
        out.push(-acc / head);
    }
    Ok(out)
}

struct Geometry {
    a: Option<f64>,
    b: Option<f64>,
}

fn check_endpoints(m: &RecurrenceMeasure, a: f64, r: usize, b: f64, s: usize) -> Result<Geometry> {
    let (lo, hi) = m.support();
    if a.is_nan() || b.is_nan() {
        return Err(Error::domain("endpoints must not be NaN"));
    }
    if a.is_finite() && a > lo {
        return Err(Error::domain(format!(
            "a = {a} lies inside the support [{lo}, {hi}]"
        )));
    }
    if b.is_finite() && b < hi {
        return Err(Error::domain(format!(
            "b = {b} lies inside the support [{lo}, {hi}]"
        )));
    }
    if a == f64::INFINITY || b == f64::NEG_INFINITY {
        return Err(Error::domain("endpoints point the wrong way"));
    }
    measures::check_modification(m, a, r, b, s)?;
    Ok(Geometry {
        a: a.is_finite().then_some(a),
        b: b.is_finite().then_some(b),
    })
}

fn check_nodes<T: Real>(nodes: &[T], geo: &Geometry, m: &RecurrenceMeasure) -> Result<()> {
    let (lo, hi) = m.support();
    let left = geo.a.map_or(lo, |a| a.max(lo).min(lo)).max(lo);
    let right = geo.b.map_or(hi, |b| b.min(hi).max(hi)).min(hi);
    let width = right - left;
    for (k, x) in nodes.iter().map(|x| x.to_f64()).enumerate() {
        if !x.is_finite() || x <= left || x >= right {
            return Err(Error::numeric(format!(
                "free node {k} = {x} is not strictly inside ({left}, {right})"
            )));
        }
    }
    for (k, pair) in nodes.windows(2).enumerate() {
        let (x0, x1) = (pair[0].to_f64(), pair[1].to_f64());
        let scale = if width.is_finite() {
            width
        } else {
            x1.abs().max(1.0)
        };
        if x1 - x0 <= 1e-13 * scale {
            return Err(Error::numeric(format!(
                "free nodes {k} and {} coalesce ({x0}, {x1}); raise the precision",
                k + 1
            )));
        }
    }
    Ok(())
}

/// The `n` free nodes: Gauss nodes of `(t-a)^r (b-t)^s dm`.
pub fn free_nodes(
    m: &RecurrenceMeasure,
    a: f64,
    r: usize,
    b: f64,
    s: usize,
    n: usize,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::domain("free_nodes needs n >= 1"));
    }
    let geo = check_endpoints(m, a, r, b, s)?;
    let nodes = free_nodes_in::<f64>(m, a, r, b, s, n)?;
    check_nodes(&nodes, &geo, m)?;
    Ok(nodes)
}

fn free_nodes_in<T: Real>(
    m: &RecurrenceMeasure,
    a: f64,
    r: usize,
    b: f64,
    s: usize,
    n: usize,
) -> Result<Vec<T>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let (alpha, beta) = measures::modified_coefficients::<T>(m, a, r, b, s, n)?;
    let (nodes, _) = tridiag::jacobi_eigen(&alpha, &beta, n)?;
    Ok(nodes)
}

fn resolve_ab<T: Real>(a: Option<f64>, b: Option<f64>) -> (T, T) {
    (
        a.map_or(T::zero(), T::from_f64),
        b.map_or(T::zero(), T::from_f64),
    )
}

fn left_poly_in<T: Real>(
    j: usize,
    a: Option<f64>,
    r: usize,
    b: Option<f64>,
    s: usize,
    nodes: &[T],
) -> Result<BasisPoly<T>> {
    if j >= r {
        return Err(Error::domain(format!(
            "left derivative index {j} out of range for r = {r}"
        )));
    }
    let at = T::from_f64(a.ok_or_else(|| Error::domain("left basis polynomial needs a finite a"))?);
    if s > 0 && b.is_none() {
        return Err(Error::domain("s > 0 needs a finite b"));
    }
    let (_, bt) = resolve_ab::<T>(a, b);
    let mut factors: Vec<(T, usize)> = nodes.iter().map(|&x| (x - at, 2)).collect();
    if s > 0 {
        factors.push((bt - at, s));
    }
    let taylor = normalized_reciprocal_taylor(&factors, r - j - 1);
    let mut end_value = T::one();
    for &(d, mult) in &factors {
        end_value *= d.powi(mult as u32);
    }
    Ok(BasisPoly {
        side: BasisSide::Left(j),
        a: at,
        b: bt,
        r,
        s,
        nodes: nodes.to_vec(),
        end_value,
        taylor,
        inv_factorial: T::one() / factorial::<T>(j),
        sign: T::one(),
    })
}

fn right_poly_in<T: Real>(
    j: usize,
    a: Option<f64>,
    r: usize,
    b: Option<f64>,
    s: usize,
    nodes: &[T],
) -> Result<BasisPoly<T>> {
    if j >= s {
        return Err(Error::domain(format!(
            "right derivative index {j} out of range for s = {s}"
        )));
    }
    let bt =
        T::from_f64(b.ok_or_else(|| Error::domain("right basis polynomial needs a finite b"))?);
    if r > 0 && a.is_none() {
        return Err(Error::domain("r > 0 needs a finite a"));
    }
    let (at, _) = resolve_ab::<T>(a, b);
    let mut factors: Vec<(T, usize)> = nodes.iter().map(|&x| (bt - x, 2)).collect();
    if r > 0 {
        factors.push((bt - at, r));
    }
    let taylor = normalized_reciprocal_taylor(&factors, s - j - 1);
    let mut end_value = T::one();
    for &(d, mult) in &factors {
        end_value *= d.powi(mult as u32);
    }
    let sign = if j % 2 == 0 { T::one() } else { -T::one() };
    Ok(BasisPoly {
        side: BasisSide::Right(j),
        a: at,
        b: bt,
        r,
        s,
        nodes: nodes.to_vec(),
        end_value,
        taylor,
        inv_factorial: T::one() / factorial::<T>(j),
        sign,
    })
}

fn interior_poly_in<T: Real>(
    j: usize,
    a: Option<f64>,
    r: usize,
    b: Option<f64>,
    s: usize,
    nodes: &[T],
) -> Result<BasisPoly<T>> {
    if j == 0 || j > nodes.len() {
        return Err(Error::domain(format!(
            "interior index {j} out of range 1..={}",
            nodes.len()
        )));
    }
    if (r > 0 && a.is_none()) || (s > 0 && b.is_none()) {
        return Err(Error::domain(
            "endpoint multiplicity needs a finite endpoint",
        ));
    }
    let (at, bt) = resolve_ab::<T>(a, b);
    Ok(BasisPoly {
        side: BasisSide::Interior(j),
        a: at,
        b: bt,
        r,
        s,
        nodes: nodes.to_vec(),
        end_value: T::one(),
        taylor: Vec::new(),
        inv_factorial: T::one(),
        sign: T::one(),
    })
}

fn opt(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Left boundary polynomial `P_j`: `j! P_j^(j)(a) = 1`, all other Hermite
/// conditions (double at each node, order `s` at `b`, order `r` at `a`) zero.
pub fn left_boundary_poly(
    j: usize,
    a: f64,
    r: usize,
    b: f64,
    s: usize,
    nodes: &[f64],
) -> Result<HermiteBasisPoly> {
    left_poly_in(j, opt(a), r, opt(b), s, nodes)
}

/// Right boundary Lagrange polynomial for the `j`-th derivative at `b`;
/// it has constant sign `(-1)^j` on `[a, b]`.
pub fn right_boundary_poly(
    j: usize,
    a: f64,
    r: usize,
    b: f64,
    s: usize,
    nodes: &[f64],
) -> Result<HermiteBasisPoly> {
    right_poly_in(j, opt(a), r, opt(b), s, nodes)
}

/// Interior polynomial `p_j` (1-based `j`) with `p_j(t_j) = 1`.
pub fn interior_basis_poly(
    j: usize,
    a: f64,
    r: usize,
    b: f64,
    s: usize,
    nodes: &[f64],
) -> Result<HermiteBasisPoly> {
    interior_poly_in(j, opt(a), r, opt(b), s, nodes)
}

/// Builds `Q_{n,r,s}` choosing double-double when `r + s` exceeds
/// [`Precision::AUTO_THRESHOLD`].
pub fn build_rule(
    m: &RecurrenceMeasure,
    a: f64,
    r: usize,
    b: f64,
    s: usize,
    n: usize,
) -> Result<GenGaussRule> {
    build_rule_with(m, a, r, b, s, n, Precision::auto(r, s))
}

pub fn build_rule_with(
    m: &RecurrenceMeasure,
    a: f64,
    r: usize,
    b: f64,
    s: usize,
    n: usize,
    precision: Precision,
) -> Result<GenGaussRule> {
    match precision {
        Precision::Double => build_rule_in::<f64>(m, a, r, b, s, n),
        Precision::DoubleDouble => {
            build_rule_in::<DoubleDouble>(m, a, r, b, s, n).map(|rule| rule.to_f64())
        }
    }
}

/// Number of auxiliary Gauss points used to integrate the basis polynomials.
pub fn auxiliary_points(n: usize, r: usize, s: usize) -> usize {
    n + (r + s).div_ceil(2) + 1
}

/// Rule construction carried out entirely in arithmetic `T`.
pub fn build_rule_in<T: Real>(
    m: &RecurrenceMeasure,
    a: f64,
    r: usize,
    b: f64,
    s: usize,
    n: usize,
) -> Result<GenGaussRule<T>> {
    if n + r + s == 0 {
        return Err(Error::domain("rule needs n + r + s >= 1"));
    }
    let geo = check_endpoints(m, a, r, b, s)?;
    let nodes = free_nodes_in::<T>(m, a, r, b, s, n)?;
    check_nodes(&nodes, &geo, m)?;

    let n_aux = auxiliary_points(n, r, s);
    let (alpha, beta) = m.coefficients::<T>(n_aux)?;
    let (aux_x, aux_w) = tridiag::gauss_nodes_weights(&alpha, &beta, n_aux)?;
    let integrate = |p: &BasisPoly<T>| {
        let mut acc = T::zero();
        for (&x, &w) in aux_x.iter().zip(&aux_w) {
            acc += w * p.eval(x);
        }
        acc
    };

    let mut left_weights = Vec::with_capacity(r);
    for j in 0..r {
        left_weights.push(integrate(&left_poly_in(j, geo.a, r, geo.b, s, &nodes)?));
    }
    let mut interior_weights = Vec::with_capacity(n);
    for j in 1..=n {
        interior_weights.push(integrate(&interior_poly_in(j, geo.a, r, geo.b, s, &nodes)?));
    }
    let mut right_weights = Vec::with_capacity(s);
    for j in 0..s {
        let p = right_poly_in(j, geo.a, r, geo.b, s, &nodes)?;
        // the Lagrange polynomial carries (-1)^j, the stored weight does not
        let v = integrate(&p);
        right_weights.push(if j % 2 == 0 { v } else { -v });
    }

    let rule = GenGaussRule {
        a: geo.a,
        r,
        b: geo.b,
        s,
        n,
        nodes,
        interior_weights,
        left_weights,
        right_weights,
        degree_exact: 2 * n + r + s - 1,
    };

    let floor = -1e-12 * beta[0].to_f64();
    if let Some(w) = rule.min_weight() {
        if w.to_f64() <= floor || !w.is_finite() {
            return Err(Error::numeric(format!(
                "weight {:e} violates positivity for (n, r, s) = ({n}, {r}, {s}); retry in double-double",
                w.to_f64()
            )));
        }
    }
    let defect = exactness_defect(&rule, &aux_x, &aux_w);
    if !(defect <= SELF_CHECK_TOL) {
        return Err(Error::numeric(format!(
            "exactness self-check failed (relative defect {defect:e}) for (n, r, s) = ({n}, {r}, {s}); retry in double-double"
        )));
    }
    Ok(rule)
}

const SELF_CHECK_TOL: f64 = 1e-8;

/// Largest relative exactness defect over scaled monomials of degree up to
/// `degree_exact`, measured against the auxiliary Gauss rule.
fn exactness_defect<T: Real>(rule: &GenGaussRule<T>, aux_x: &[T], aux_w: &[T]) -> f64 {
    let xs: Vec<f64> = aux_x.iter().map(|x| x.to_f64()).collect();
    let mut lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if let Some(a) = rule.a {
        lo = lo.min(a);
    }
    if let Some(b) = rule.b {
        hi = hi.max(b);
    }
    let center = T::from_f64(0.5 * (lo + hi));
    let half = T::from_f64((0.5 * (hi - lo)).max(f64::MIN_POSITIVE));
    let scaled = |t: T| (t - center) / half;

    let mut worst: f64 = 0.0;
    for k in 0..=rule.degree_exact {
        let mut exact = T::zero();
        let mut magnitude = T::zero();
        for (&x, &w) in aux_x.iter().zip(aux_w) {
            let term = w * scaled(x).powi(k as u32);
            exact += term;
            magnitude += term.abs();
        }
        // derivative j of u^k with u = (t - c)/h
        let derivs = |t: T, count: usize| -> Vec<T> {
            (0..count)
                .map(|j| {
                    if j > k {
                        T::zero()
                    } else {
                        let mut falling = T::one();
                        for i in 0..j {
                            falling *= T::from_usize(k - i);
                        }
                        falling * scaled(t).powi((k - j) as u32) / half.powi(j as u32)
                    }
                })
                .collect()
        };
        let left = rule
            .a
            .map(|a| derivs(T::from_f64(a), rule.r))
            .unwrap_or_default();
        let right = rule
            .b
            .map(|b| derivs(T::from_f64(b), rule.s))
            .unwrap_or_default();
        let values: Vec<T> = rule
            .nodes
            .iter()
            .map(|&x| scaled(x).powi(k as u32))
            .collect();
        let approx = rule.combine(&left, &values, &right);
        for (w, d) in rule.left_weights.iter().zip(&left) {
            magnitude += (*w * *d).abs();
        }
        for (w, d) in rule.right_weights.iter().zip(&right) {
            magnitude += (*w * *d).abs();
        }
        for (w, v) in rule.interior_weights.iter().zip(&values) {
            magnitude += (*w * *v).abs();
        }
        let defect = ((approx - exact).abs() / magnitude).to_f64();
        worst = worst.max(defect);
    }
    worst
}

/// The rule for the reflected measure `t -> -t`.
pub fn reflect_rule<T: Real>(rule: &GenGaussRule<T>) -> Result<GenGaussRule<T>> {
    let (a, b) = match (rule.a, rule.b) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::domain("reflection needs a finite interval [a, b]")),
    };
    let rev_neg = |v: &[T]| v.iter().rev().map(|&x| -x).collect::<Vec<T>>();
    Ok(GenGaussRule {
        a: Some(-b),
        r: rule.s,
        b: Some(-a),
        s: rule.r,
        n: rule.n,
        nodes: rev_neg(&rule.nodes),
        interior_weights: rule.interior_weights.iter().rev().copied().collect(),
        left_weights: rule.right_weights.clone(),
        right_weights: rule.left_weights.clone(),
        degree_exact: rule.degree_exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::jacobi_measure;
    use approx::assert_relative_eq;

    fn legendre() -> RecurrenceMeasure {
        jacobi_measure(0.0, 0.0).unwrap()
    }

    #[test]
    fn free_node_examples() {
        let m = legendre();
        assert!(free_nodes(&m, -1.0, 1, 1.0, 1, 1).unwrap()[0].abs() < 1e-15);
        assert_relative_eq!(
            free_nodes(&m, -1.0, 1, 1.0, 0, 1).unwrap()[0],
            1.0 / 3.0,
            max_relative = 1e-14
        );
        let g = free_nodes(&m, -1.0, 0, 1.0, 0, 2).unwrap();
        assert_relative_eq!(g[1], 0.5773502691896258, max_relative = 1e-15);
        assert_relative_eq!(g[0], -0.5773502691896258, max_relative = 1e-15);
    }

    #[test]
    fn taylor_reciprocal_examples() {
        assert_eq!(
            taylor_reciprocal(&[1.0, -1.0], 3).unwrap(),
            vec![1.0, 1.0, 1.0, 1.0]
        );
        assert_eq!(
            taylor_reciprocal(&[2.0, 0.0], 2).unwrap(),
            vec![0.5, 0.0, 0.0]
        );
        assert_eq!(
            taylor_reciprocal(&[1.0, -2.0, 1.0], 2).unwrap(),
            vec![1.0, 2.0, 3.0]
        );
        assert!(matches!(
            taylor_reciprocal(&[0.0, 1.0], 2),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn log_derivative_route_matches_reciprocal_route() {
        // omega(t) = (2 - t)^1 (0.5 - t)^2 around a = -1
        let a = -1.0;
        let factors = [(3.0, 1usize), (1.5, 2usize)];
        let normalized = normalized_reciprocal_taylor(&factors, 6);
        // expand omega in u = t - a
        let mut series = vec![1.0];
        for &(d, mult) in &factors {
            for _ in 0..mult {
                series = poly_mul(&series, &[d, -1.0]);
            }
        }
        let direct = taylor_reciprocal(&series, 6).unwrap();
        let omega_a: f64 = 3.0 * 1.5 * 1.5;
        for k in 0..=6 {
            assert_relative_eq!(normalized[k] / omega_a, direct[k], max_relative = 1e-13);
        }
        let _ = a;
    }

    #[test]
    fn left_poly_examples() {
        let p = left_boundary_poly(0, -1.0, 1, 1.0, 0, &[]).unwrap();
        for t in [-1.0, 0.0, 0.7] {
            assert_relative_eq!(p.eval(t), 1.0);
        }
        let p = left_boundary_poly(0, -1.0, 2, 1.0, 0, &[]).unwrap();
        assert_relative_eq!(p.eval(0.3), 1.0);
        let p = left_boundary_poly(0, -1.0, 1, 1.0, 1, &[0.0]).unwrap();
        for t in [-1.0, -0.4, 0.2, 0.9] {
            assert_relative_eq!(
                p.eval(t),
                (1.0 - t) * t * t / 2.0,
                max_relative = 1e-14,
                epsilon = 1e-16
            );
        }
        assert!(matches!(
            left_boundary_poly(2, -1.0, 2, 1.0, 0, &[]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn interior_poly_examples() {
        let p = interior_basis_poly(1, -1.0, 0, 1.0, 0, &[0.2]).unwrap();
        assert_eq!(p.eval(0.9), 1.0);
        let p = interior_basis_poly(1, -1.0, 1, 1.0, 1, &[0.0]).unwrap();
        for t in [-0.5, 0.3] {
            assert_relative_eq!(p.eval(t), 1.0 - t * t, max_relative = 1e-15);
        }
        let g = 1.0 / 3f64.sqrt();
        let p = interior_basis_poly(1, -1.0, 0, 1.0, 0, &[-g, g]).unwrap();
        assert_relative_eq!(p.eval(-g), 1.0);
        assert_relative_eq!(
            p.eval(0.1),
            (g - 0.1) * (g - 0.1) / (4.0 * g * g),
            max_relative = 1e-14
        );
    }

    #[test]
    fn monomial_form_agrees_with_factored_form() {
        let nodes = [-0.4, 0.3];
        let polys = [
            left_boundary_poly(1, -1.0, 3, 1.0, 2, &nodes).unwrap(),
            right_boundary_poly(1, -1.0, 3, 1.0, 2, &nodes).unwrap(),
            interior_basis_poly(2, -1.0, 3, 1.0, 2, &nodes).unwrap(),
        ];
        for p in &polys {
            let c = p.monomial_coefficients();
            for t in [-0.9, -0.1, 0.5, 0.95] {
                let v: f64 = c.iter().rev().fold(0.0, |acc, &x| acc * t + x);
                assert_relative_eq!(v, p.eval(t), max_relative = 1e-10, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn lobatto_and_radau() {
        let m = legendre();
        let lob = build_rule(&m, -1.0, 1, 1.0, 1, 1).unwrap();
        assert!(lob.nodes[0].abs() < 1e-15);
        assert_relative_eq!(lob.interior_weights[0], 4.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(lob.left_weights[0], 1.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(lob.right_weights[0], 1.0 / 3.0, max_relative = 1e-14);
        assert_eq!(lob.degree_exact, 3);

        let rad = build_rule(&m, -1.0, 1, 1.0, 0, 1).unwrap();
        assert_relative_eq!(rad.left_weights[0], 0.5, max_relative = 1e-14);
        assert_relative_eq!(rad.nodes[0], 1.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(rad.interior_weights[0], 1.5, max_relative = 1e-14);
    }

    #[test]
    fn pure_endpoint_rules() {
        let m = legendre();
        let rule = build_rule(&m, -1.0, 2, 1.0, 0, 0).unwrap();
        assert_relative_eq!(rule.left_weights[0], 2.0, max_relative = 1e-14);
        assert_relative_eq!(rule.left_weights[1], 2.0, max_relative = 1e-14);
        let lag = crate::measures::laguerre_measure(1.5).unwrap();
        let rule = build_rule(&lag, 0.0, 1, f64::INFINITY, 0, 0).unwrap();
        assert_relative_eq!(rule.left_weights[0], lag.total_mass(), max_relative = 1e-14);
        assert!(rule.b.is_none());
        assert!(matches!(
            build_rule(&m, -1.0, 0, 1.0, 0, 0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn double_double_agrees_with_double() {
        let m = jacobi_measure(0.5, -0.5).unwrap();
        let d = build_rule_with(&m, -1.0, 3, 1.0, 2, 6, Precision::Double).unwrap();
        let q = build_rule_with(&m, -1.0, 3, 1.0, 2, 6, Precision::DoubleDouble).unwrap();
        for (x, y) in d.left_weights.iter().zip(&q.left_weights) {
            assert_relative_eq!(x, y, max_relative = 1e-12);
        }
        for (x, y) in d.nodes.iter().zip(&q.nodes) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn reflection() {
        let m = legendre();
        let rad = build_rule(&m, -1.0, 1, 1.0, 0, 1).unwrap();
        let refl = reflect_rule(&rad).unwrap();
        assert_eq!((refl.r, refl.s), (0, 1));
        assert_relative_eq!(refl.nodes[0], -1.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(refl.right_weights[0], 0.5, max_relative = 1e-14);
        assert_eq!(reflect_rule(&refl).unwrap(), rad);

        let sym = build_rule(&m, -1.0, 2, 1.0, 2, 4).unwrap();
        let back = reflect_rule(&sym).unwrap();
        for (x, y) in sym.nodes.iter().zip(&back.nodes) {
            assert!((x - y).abs() < 1e-14);
        }
        let lag = crate::measures::laguerre_measure(0.0).unwrap();
        let rule = build_rule(&lag, 0.0, 1, f64::INFINITY, 0, 2).unwrap();
        assert!(matches!(reflect_rule(&rule), Err(Error::Domain(_))));
    }
}
