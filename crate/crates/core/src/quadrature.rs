//! Applying generalized Gauss rules, remainders, norm bounds and composite rules.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exprcalc::{Expr, TaylorJet};
use crate::measures::{self, RecurrenceMeasure};
use crate::rulegen::{self, GenGaussRule};

/// Plain derivatives `f(point), f'(point), ..., f^(k)(point)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EndpointJet {
    pub point: f64,
    pub values: Vec<f64>,
}

impl EndpointJet {
    pub fn new(point: f64, values: Vec<f64>) -> Self {
        EndpointJet { point, values }
    }

    /// Highest derivative order present, `None` when empty.
    pub fn order(&self) -> Option<usize> {
        self.values.len().checked_sub(1)
    }
}

impl From<&TaylorJet> for EndpointJet {
    fn from(jet: &TaylorJet) -> Self {
        EndpointJet {
            point: jet.anchor,
            values: jet.derivatives(),
        }
    }
}

/// A function that can be sampled and differentiated at a point.
pub trait Integrand: Sync {
    fn value(&self, t: f64) -> Result<f64>;
    /// Plain derivatives of orders `0..=order` at `t`.
    fn derivatives(&self, t: f64, order: usize) -> Result<Vec<f64>>;
}

impl Integrand for Expr {
    fn value(&self, t: f64) -> Result<f64> {
        self.eval(t)
    }

    fn derivatives(&self, t: f64, order: usize) -> Result<Vec<f64>> {
        Ok(self.jet(t, order)?.derivatives())
    }
}

/// Polynomial in monomial form, ascending powers.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial(pub Vec<f64>);

impl Polynomial {
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![0.0; k + 1];
        c[k] = 1.0;
        Polynomial(c)
    }
}

impl Integrand for Polynomial {
    fn value(&self, t: f64) -> Result<f64> {
        Ok(self.0.iter().rev().fold(0.0, |acc, &c| acc * t + c))
    }

    fn derivatives(&self, t: f64, order: usize) -> Result<Vec<f64>> {
        let mut coeffs = self.0.clone();
        let mut out = Vec::with_capacity(order + 1);
        for _ in 0..=order {
            out.push(coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c));
            coeffs = coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| i as f64 * c)
                .collect();
        }
        Ok(out)
    }
}

fn anchored(jet: &EndpointJet, at: f64, needed: usize, side: &str) -> Result<()> {
    if (jet.point - at).abs() > 1e-14 * at.abs().max(1.0) {
        return Err(Error::domain(format!(
            "{side} jet anchored at {} but the rule endpoint is {at}",
            jet.point
        )));
    }
    if jet.values.len() < needed {
        return Err(Error::domain(format!(
            "{side} jet has {} entries, {needed} needed",
            jet.values.len()
        )));
    }
    Ok(())
}

/// `sum L_j f^(j)(a) + sum w_k f(t_k) + sum (-1)^j R_j f^(j)(b)`.
pub fn apply(
    rule: &GenGaussRule,
    left: Option<&EndpointJet>,
    interior_values: &[f64],
    right: Option<&EndpointJet>,
) -> Result<f64> {
    if interior_values.len() != rule.n {
        return Err(Error::domain(format!(
            "{} interior values given for {} nodes",
            interior_values.len(),
            rule.n
        )));
    }
    let empty: &[f64] = &[];
    let left_values = if rule.r > 0 {
        let jet = left.ok_or_else(|| Error::domain("left endpoint jet missing"))?;
        anchored(jet, rule.a.unwrap_or(f64::NAN), rule.r, "left")?;
        &jet.values[..rule.r]
    } else {
        empty
    };
    let right_values = if rule.s > 0 {
        let jet = right.ok_or_else(|| Error::domain("right endpoint jet missing"))?;
        anchored(jet, rule.b.unwrap_or(f64::NAN), rule.s, "right")?;
        &jet.values[..rule.s]
    } else {
        empty
    };
    Ok(rule.combine(left_values, interior_values, right_values))
}

/// Samples `f` as the rule requires and applies the rule.
pub fn apply_fn(rule: &GenGaussRule, f: &dyn Integrand) -> Result<f64> {
    let left = match (rule.r, rule.a) {
        (0, _) => None,
        (r, Some(a)) => Some(EndpointJet::new(a, f.derivatives(a, r - 1)?)),
        (_, None) => return Err(Error::domain("rule has r > 0 but no finite a")),
    };
    let right = match (rule.s, rule.b) {
        (0, _) => None,
        (s, Some(b)) => Some(EndpointJet::new(b, f.derivatives(b, s - 1)?)),
        (_, None) => return Err(Error::domain("rule has s > 0 but no finite b")),
    };
    let values = rule
        .nodes
        .iter()
        .map(|&t| f.value(t))
        .collect::<Result<Vec<_>>>()?;
    apply(rule, left.as_ref(), &values, right.as_ref())
}

/// `reference_integral - Q(f)`.
pub fn remainder(rule: &GenGaussRule, f: &dyn Integrand, reference_integral: f64) -> Result<f64> {
    Ok(reference_integral - apply_fn(rule, f)?)
}

const REFERENCE_POINTS: usize = 200;
const REFERENCE_CHECK_POINTS: usize = 250;
const REFERENCE_TOL: f64 = 1e-12;

/// `int f dm` by a 200-point Gauss rule, confirmed by a 250-point rule.
pub fn reference_integral(m: &RecurrenceMeasure, f: &dyn Integrand) -> Result<f64> {
    let coarse = measures::gauss_rule(m, REFERENCE_POINTS)?;
    let fine = measures::gauss_rule(m, REFERENCE_CHECK_POINTS)?;
    let i1 = coarse.try_integrate(|t| f.value(t))?;
    let i2 = fine.try_integrate(|t| f.value(t))?;
    if (i1 - i2).abs() > REFERENCE_TOL * i2.abs().max(1.0) {
        return Err(Error::numeric(format!(
            "reference integral unresolved: {i1:e} ({REFERENCE_POINTS} points) vs {i2:e} ({REFERENCE_CHECK_POINTS} points)"
        )));
    }
    Ok(i2)
}

/// Sum of all weights, an upper bound for the norm of the rule on `C^q`.
pub fn norm_estimate(rule: &GenGaussRule) -> f64 {
    rule.weight_sum()
}

/// Total mass recovered from exactness on constants.
pub fn rule_mass(rule: &GenGaussRule) -> f64 {
    rule.left_weights.first().copied().unwrap_or(0.0)
        + rule.interior_weights.iter().sum::<f64>()
        + rule.right_weights.first().copied().unwrap_or(0.0)
}

/// `(1 + r^2 (b-a)^r + s^2 (b-a)^s) * int dm`.
pub fn norm_bound_rate2(rule: &GenGaussRule) -> Result<f64> {
    let (a, b) = match (rule.a, rule.b) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::domain("norm bound needs a compact interval [a, b]")),
    };
    let len = b - a;
    let (r, s) = (rule.r as f64, rule.s as f64);
    let factor = 1.0 + r * r * len.powi(rule.r as i32) + s * s * len.powi(rule.s as i32);
    Ok(factor * rule_mass(rule))
}

/// The `n`-independent bound `int dm + int P dm` for the sum of all
/// weights of `Q_{n,r,s}`, where `P` adds the `n = 0` boundary basis
/// polynomials of derivative order at least one.
pub fn uniform_norm_bound(
    m: &RecurrenceMeasure,
    a: f64,
    r: usize,
    b: f64,
    s: usize,
) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain(
            "uniform bound needs a compact interval [a, b]",
        ));
    }
    let mut polys = Vec::new();
    for j in 1..r {
        polys.push(rulegen::left_boundary_poly(j, a, r, b, s, &[])?);
    }
    for j in 1..s {
        polys.push(rulegen::right_boundary_poly(j, a, r, b, s, &[])?);
    }
    let points = (r + s).div_ceil(2) + 1;
    let gauss = measures::gauss_rule(m, points)?;
    let mut integral = 0.0;
    for p in &polys {
        // right polynomials carry (-1)^j, which the sum multiplies back out
        let sign = match p.side() {
            rulegen::BasisSide::Right(k) if k % 2 == 1 => -1.0,
            _ => 1.0,
        };
        integral += sign * gauss.integrate(|t| p.eval(t));
    }
    Ok(m.total_mass() + integral)
}

/// Maps a rule on `[-1, 1]` to `[lo, hi]` for Lebesgue measure.
///
/// Value weights scale by `h = (hi - lo)/2`, derivative weights of order
/// `j` by `h^(j+1)`.
pub fn scale_rule(rule: &GenGaussRule, lo: f64, hi: f64) -> Result<GenGaussRule> {
    if rule.a != Some(-1.0) || rule.b != Some(1.0) {
        return Err(Error::domain("scale_rule expects a rule on [-1, 1]"));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::domain(format!("invalid cell [{lo}, {hi}]")));
    }
    let h = 0.5 * (hi - lo);
    let c = 0.5 * (hi + lo);
    let scale_derivs = |w: &[f64]| {
        let mut p = h;
        w.iter()
            .map(|&x| {
                let out = x * p;
                p *= h;
                out
            })
            .collect::<Vec<f64>>()
    };
    Ok(GenGaussRule {
        a: Some(lo),
        r: rule.r,
        b: Some(hi),
        s: rule.s,
        n: rule.n,
        nodes: rule.nodes.iter().map(|&u| c + h * u).collect(),
        interior_weights: rule.interior_weights.iter().map(|&w| w * h).collect(),
        left_weights: scale_derivs(&rule.left_weights),
        right_weights: scale_derivs(&rule.right_weights),
        degree_exact: rule.degree_exact,
    })
}

/// Per-cell rule parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellSpec {
    pub n: usize,
    pub r: usize,
    pub s: usize,
}

/// Composite rule for Lebesgue measure on `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeRule {
    pub partition: Vec<f64>,
    pub cell_rules: Vec<CellSpec>,
    pub mesh_size: f64,
}

impl CompositeRule {
    pub fn new(partition: Vec<f64>, cell_rules: Vec<CellSpec>) -> Result<Self> {
        if partition.len() < 2 {
            return Err(Error::domain("partition needs at least two breakpoints"));
        }
        if cell_rules.len() != partition.len() - 1 {
            return Err(Error::domain(format!(
                "{} cell rules for {} cells",
                cell_rules.len(),
                partition.len() - 1
            )));
        }
        if partition.iter().any(|x| !x.is_finite()) || partition.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain(
                "breakpoints must be finite and strictly increasing",
            ));
        }
        let mesh_size = partition
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max);
        Ok(CompositeRule {
            partition,
            cell_rules,
            mesh_size,
        })
    }

    /// `cells` equal subintervals of `[a, b]` with the same rule on each.
    pub fn uniform(a: f64, b: f64, cells: usize, spec: CellSpec) -> Result<Self> {
        if cells == 0 {
            return Err(Error::domain("at least one cell is needed"));
        }
        let partition = (0..=cells)
            .map(|i| {
                if i == cells {
                    b
                } else {
                    a + (b - a) * i as f64 / cells as f64
                }
            })
            .collect();
        CompositeRule::new(partition, vec![spec; cells])
    }
}

fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        len => {
            let (lo, hi) = values.split_at(len / 2);
            pairwise_sum(lo) + pairwise_sum(hi)
        }
    }
}

/// Applies a composite rule; only Lebesgue measure is supported.
pub fn composite_apply(
    comp: &CompositeRule,
    m: &RecurrenceMeasure,
    f: &dyn Integrand,
) -> Result<f64> {
    if !m.is_lebesgue() {
        return Err(Error::Unsupported(
            "composite rules are implemented for Lebesgue measure only".into(),
        ));
    }
    let mut reference = BTreeMap::new();
    for spec in &comp.cell_rules {
        if !reference.contains_key(spec) {
            let rule = rulegen::build_rule(m, -1.0, spec.r, 1.0, spec.s, spec.n)?;
            reference.insert(*spec, rule);
        }
    }
    let cells: Vec<f64> = (0..comp.cell_rules.len())
        .into_par_iter()
        .map(|i| {
            let rule = scale_rule(
                &reference[&comp.cell_rules[i]],
                comp.partition[i],
                comp.partition[i + 1],
            )?;
            apply_fn(&rule, f)
        })
        .collect::<Result<_>>()?;
    Ok(pairwise_sum(&cells))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprcalc::parse;
    use crate::measures::jacobi_measure;
    use crate::rulegen::build_rule;
    use approx::assert_relative_eq;

    fn legendre() -> RecurrenceMeasure {
        jacobi_measure(0.0, 0.0).unwrap()
    }

    #[test]
    fn apply_examples() {
        let m = legendre();
        let lob = build_rule(&m, -1.0, 1, 1.0, 1, 1).unwrap();
        assert_relative_eq!(
            apply_fn(&lob, &Polynomial::monomial(0)).unwrap(),
            2.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            apply_fn(&lob, &Polynomial::monomial(2)).unwrap(),
            2.0 / 3.0,
            max_relative = 1e-14
        );
        let taylor = build_rule(&m, -1.0, 2, 1.0, 0, 0).unwrap();
        assert!(apply_fn(&taylor, &Polynomial::monomial(1)).unwrap().abs() < 1e-14);
    }

    #[test]
    fn apply_checks_jets() {
        let m = legendre();
        let lob = build_rule(&m, -1.0, 1, 1.0, 1, 1).unwrap();
        let good = EndpointJet::new(-1.0, vec![1.0]);
        let wrong_place = EndpointJet::new(-0.5, vec![1.0]);
        let short = EndpointJet::new(1.0, vec![]);
        assert!(apply(
            &lob,
            Some(&good),
            &[1.0],
            Some(&EndpointJet::new(1.0, vec![1.0]))
        )
        .is_ok());
        assert!(matches!(
            apply(&lob, Some(&wrong_place), &[1.0], Some(&good)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            apply(&lob, Some(&good), &[1.0], Some(&short)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            apply(&lob, Some(&good), &[], None),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn remainder_of_exact_polynomial_vanishes() {
        let m = legendre();
        let rule = build_rule(&m, -1.0, 2, 1.0, 1, 3).unwrap();
        let f = Polynomial(vec![1.0, -2.0, 0.5, 3.0, 0.0, 1.0, -1.0, 0.25, 2.0]);
        // exact integral of the even powers over [-1, 1]
        let exact: f64 =
            f.0.iter()
                .enumerate()
                .filter(|(k, _)| k % 2 == 0)
                .map(|(k, c)| 2.0 * c / (k as f64 + 1.0))
                .sum();
        assert!(remainder(&rule, &f, exact).unwrap().abs() < 1e-13);
    }

    #[test]
    fn norm_examples() {
        let m = legendre();
        let gauss = build_rule(&m, -1.0, 0, 1.0, 0, 4).unwrap();
        assert_relative_eq!(norm_estimate(&gauss), 2.0, max_relative = 1e-14);
        assert_relative_eq!(norm_bound_rate2(&gauss).unwrap(), 2.0, max_relative = 1e-14);
        let lob = build_rule(&m, -1.0, 1, 1.0, 1, 1).unwrap();
        assert_relative_eq!(norm_estimate(&lob), 2.0, max_relative = 1e-14);
        assert_relative_eq!(norm_bound_rate2(&lob).unwrap(), 10.0, max_relative = 1e-14);
        let taylor = build_rule(&m, -1.0, 2, 1.0, 0, 0).unwrap();
        assert_relative_eq!(
            norm_bound_rate2(&taylor).unwrap(),
            34.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn uniform_bound_dominates() {
        let m = legendre();
        let bound = uniform_norm_bound(&m, -1.0, 3, 1.0, 3).unwrap();
        for n in [0, 1, 5, 12] {
            let rule = build_rule(&m, -1.0, 3, 1.0, 3, n).unwrap();
            assert!(norm_estimate(&rule) <= bound * (1.0 + 1e-12));
        }
        // at n = 0 the bound is attained
        let rule = build_rule(&m, -1.0, 3, 1.0, 3, 0).unwrap();
        assert_relative_eq!(norm_estimate(&rule), bound, max_relative = 1e-12);
    }

    #[test]
    fn reference_integral_of_pole_function() {
        let m = legendre();
        let f = parse("1/(t-2)").unwrap();
        assert_relative_eq!(
            reference_integral(&m, &f).unwrap(),
            -(3f64.ln()),
            max_relative = 1e-14
        );
    }

    #[test]
    fn scaled_rule_matches_direct_construction() {
        let m = legendre();
        let base = build_rule(&m, -1.0, 2, 1.0, 3, 3).unwrap();
        let (lo, hi) = (0.5, 2.0);
        let scaled = scale_rule(&base, lo, hi).unwrap();
        let (h, c) = (0.5 * (hi - lo), 0.5 * (hi + lo));
        let alpha: Vec<f64> = m.alpha().iter().map(|&x| c + h * x).collect();
        let beta: Vec<f64> = m
            .beta()
            .iter()
            .enumerate()
            .map(|(k, &x)| if k == 0 { h * x } else { h * h * x })
            .collect();
        let mapped = RecurrenceMeasure::from_coefficients("mapped", lo, hi, alpha, beta).unwrap();
        let direct = build_rule(&mapped, lo, 2, hi, 3, 3).unwrap();
        for (x, y) in scaled.left_weights.iter().zip(&direct.left_weights) {
            assert_relative_eq!(x, y, max_relative = 1e-11);
        }
        for (x, y) in scaled.right_weights.iter().zip(&direct.right_weights) {
            assert_relative_eq!(x, y, max_relative = 1e-11);
        }
        for (x, y) in scaled.nodes.iter().zip(&direct.nodes) {
            assert_relative_eq!(x, y, max_relative = 1e-13);
        }
    }

    #[test]
    fn composite_rules() {
        let m = legendre();
        let spec = CellSpec { n: 2, r: 1, s: 1 };
        let f = parse("exp(t)").unwrap();
        let exact = 1f64.exp() - 1.0;
        let shifted = |cells| {
            let comp = CompositeRule::uniform(0.0, 1.0, cells, spec).unwrap();
            composite_apply(&comp, &m, &f).unwrap() - exact
        };
        let ratio = shifted(4) / shifted(2);
        let expected = 2f64.powi(-6);
        assert!(
            ratio > expected / 2.0 && ratio < expected * 2.0,
            "ratio {ratio}"
        );

        let single = CompositeRule::uniform(-1.0, 1.0, 1, spec).unwrap();
        let rule = build_rule(&m, -1.0, 1, 1.0, 1, 2).unwrap();
        assert_eq!(
            composite_apply(&single, &m, &f).unwrap(),
            apply_fn(&rule, &f).unwrap()
        );

        let cubic = Polynomial(vec![0.0, 0.0, 0.0, 4.0]);
        let comp = CompositeRule::new(vec![0.0, 0.1, 0.5, 2.0], vec![spec; 3]).unwrap();
        assert_relative_eq!(
            composite_apply(&comp, &m, &cubic).unwrap(),
            16.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(comp.mesh_size, 1.5);

        let jac = jacobi_measure(0.5, 0.5).unwrap();
        assert!(matches!(
            composite_apply(&comp, &jac, &cubic),
            Err(Error::Unsupported(_))
        ));
    }
}
