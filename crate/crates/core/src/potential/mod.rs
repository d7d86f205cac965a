//! Weighted equilibrium problem on `[-1, 1]` with point charges of mass
//! `alpha/2` at `a <= -1` and `beta/2` at `b >= 1`.
//!
//! The extremal measure lives on `[A, B] ⊂ [-1, 1]`, where `A`, `B` solve
//!
//! ```text
//! E1 = (alpha/2)(sqrt((A-a)/(B-a)) - 1) + (beta/2)(sqrt((b-A)/(b-B)) - 1)   = 1 if B < 1, <= 1 if B = 1
//! E2 = (alpha/2)(sqrt((B-a)/(A-a)) - 1) + (beta/2)(sqrt((b-B)/(b-A)) - 1)   = 1 if A > -1, <= 1 if A = -1
//! ```
//!
//! The level function
//!
//! ```text
//! L(z) = |phi(z)|^-2 |(1 - phi(z) phi(a)) / (phi(z) (phi(z) - phi(a)))|^alpha
//!                    |(1 - phi(z) phi(b)) / (phi(z) (phi(z) - phi(b)))|^beta
//! ```
//!
//! with `phi` the exterior map of `[A, B]`, gives the predicted n-th root
//! rate of the remainder: `L(z0)` for the nearest singularity `z0`.

mod contour;

pub use contour::{trace_contours, ContourSet, Polyline, Window};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which of the constraints `A = -1`, `B = 1` are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SupportCase {
    #[serde(rename = "interior")]
    Interior,
    #[serde(rename = "pinA")]
    PinA,
    #[serde(rename = "pinB")]
    PinB,
    #[serde(rename = "pinAB")]
    PinAB,
}

impl SupportCase {
    pub fn as_str(self) -> &'static str {
        match self {
            SupportCase::Interior => "interior",
            SupportCase::PinA => "pinA",
            SupportCase::PinB => "pinB",
            SupportCase::PinAB => "pinAB",
        }
    }
}

/// Parameters of the level sets together with the solved support `[A, B]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelSetSpec {
    pub a: f64,
    pub alpha: f64,
    pub b: f64,
    pub beta: f64,
    #[serde(rename = "A")]
    pub lo: f64,
    #[serde(rename = "B")]
    pub hi: f64,
    pub case: SupportCase,
}

fn sqrt_ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        (num / den).sqrt()
    }
}

/// The two left-hand sides `(E1, E2)` of the support system.
pub fn support_system(a: f64, alpha: f64, b: f64, beta: f64, lo: f64, hi: f64) -> (f64, f64) {
    let mut e1 = 0.0;
    let mut e2 = 0.0;
    if alpha > 0.0 {
        e1 += 0.5 * alpha * (sqrt_ratio(lo - a, hi - a) - 1.0);
        e2 += 0.5 * alpha * (sqrt_ratio(hi - a, lo - a) - 1.0);
    }
    if beta > 0.0 {
        e1 += 0.5 * beta * (sqrt_ratio(b - lo, b - hi) - 1.0);
        e2 += 0.5 * beta * (sqrt_ratio(b - hi, b - lo) - 1.0);
    }
    (e1, e2)
}

/// `F(A, B) = (1 + alpha/2 + beta/2) log((B-A)/4) + (alpha/2) log|phi(a)| + (beta/2) log|phi(b)|`.
pub fn f_functional(a: f64, alpha: f64, b: f64, beta: f64, lo: f64, hi: f64) -> f64 {
    let mut value = (1.0 + 0.5 * alpha + 0.5 * beta) * ((hi - lo) / 4.0).ln();
    if alpha > 0.0 {
        value += 0.5 * alpha * phi(Complex64::new(a, 0.0), lo, hi).norm().ln();
    }
    if beta > 0.0 {
        value += 0.5 * beta * phi(Complex64::new(b, 0.0), lo, hi).norm().ln();
    }
    value
}

const NEWTON_MAX_ITER: usize = 100;
const RESIDUAL_TOL: f64 = 1e-12;
const INEQUALITY_SLACK: f64 = 1e-12;
const SCAN_POINTS: usize = 2048;

/// Fallback starting points after `(-0.5, 0.5)`.
const NEWTON_STARTS: [(f64, f64); 5] = [
    (-0.5, 0.5),
    (-0.9, 0.9),
    (-0.9, 0.2),
    (-0.2, 0.9),
    (-0.1, 0.1),
];

fn newton_interior(a: f64, alpha: f64, b: f64, beta: f64) -> Option<(f64, f64)> {
    if alpha == 0.0 || beta == 0.0 {
        // a free endpoint needs a charge on that side to balance it
        return None;
    }
    NEWTON_STARTS
        .iter()
        .find_map(|&start| newton_from(a, alpha, b, beta, start))
}

fn newton_from(a: f64, alpha: f64, b: f64, beta: f64, start: (f64, f64)) -> Option<(f64, f64)> {
    let inside = |lo: f64, hi: f64| lo > -1.0 && hi < 1.0 && lo < hi && lo > a && hi < b;
    let residual = |lo: f64, hi: f64| {
        let (e1, e2) = support_system(a, alpha, b, beta, lo, hi);
        (e1 - 1.0, e2 - 1.0)
    };
    let (mut lo, mut hi) = start;
    let (mut r1, mut r2) = residual(lo, hi);
    for _ in 0..NEWTON_MAX_ITER {
        if r1.abs().max(r2.abs()) < 0.1 * RESIDUAL_TOL {
            break;
        }
        let u = ((lo - a) / (hi - a)).sqrt();
        let v = ((b - lo) / (b - hi)).sqrt();
        let du_lo = u / (2.0 * (lo - a));
        let du_hi = -u / (2.0 * (hi - a));
        let dv_lo = -v / (2.0 * (b - lo));
        let dv_hi = v / (2.0 * (b - hi));
        let (ha, hb) = (0.5 * alpha, 0.5 * beta);
        let j11 = ha * du_lo + hb * dv_lo;
        let j12 = ha * du_hi + hb * dv_hi;
        let j21 = -ha * du_lo / (u * u) - hb * dv_lo / (v * v);
        let j22 = -ha * du_hi / (u * u) - hb * dv_hi / (v * v);
        let det = j11 * j22 - j12 * j21;
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let d_lo = (r1 * j22 - r2 * j12) / det;
        let d_hi = (j11 * r2 - j21 * r1) / det;
        let norm = r1.abs().max(r2.abs());
        let mut step = 1.0;
        loop {
            let (nlo, nhi) = (lo - step * d_lo, hi - step * d_hi);
            if inside(nlo, nhi) {
                let (n1, n2) = residual(nlo, nhi);
                if n1.abs().max(n2.abs()) < norm || step < 1e-3 {
                    lo = nlo;
                    hi = nhi;
                    r1 = n1;
                    r2 = n2;
                    break;
                }
            }
            step *= 0.5;
            if step < 1e-12 {
                return None;
            }
        }
    }
    (r1.abs().max(r2.abs()) < RESIDUAL_TOL && inside(lo, hi)).then_some((lo, hi))
}

/// Sample points on `(-1, 1)` refined geometrically toward `+1`.
fn scan_grid() -> Vec<f64> {
    let mut xs: Vec<f64> = (1..SCAN_POINTS)
        .map(|k| -1.0 + 2.0 * k as f64 / SCAN_POINTS as f64)
        .collect();
    for m in 4..=15 {
        xs.push(1.0 - 10f64.powi(-m));
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// All roots of `g` on the scan grid, refined by bisection.
fn scan_roots(g: impl Fn(f64) -> f64, mirror: bool) -> Vec<f64> {
    let grid: Vec<f64> = if mirror {
        scan_grid().into_iter().rev().map(|x| -x).collect()
    } else {
        scan_grid()
    };
    let mut roots = Vec::new();
    let mut prev_x = grid[0];
    let mut prev_g = g(prev_x);
    for &x in &grid[1..] {
        let gx = g(x);
        if gx == 0.0 {
            roots.push(x);
        } else if prev_g.is_finite()
            && ((gx.is_finite() && prev_g.signum() != gx.signum() && prev_g != 0.0)
                || (gx == f64::INFINITY && prev_g < 0.0))
        {
            roots.push(bisect(&g, prev_x.min(x), prev_x.max(x)));
        }
        prev_x = x;
        prev_g = gx;
    }
    roots
}

fn bisect(g: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g_lo = g(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return mid;
        }
        if (gm > 0.0) == (g_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if g(lo).abs() <= g(hi).abs() {
        lo
    } else {
        hi
    }
}

/// Solves the support system by an active-set search in the fixed order
/// interior, pin A, pin B, pin both.
pub fn solve_support(a: f64, alpha: f64, b: f64, beta: f64) -> Result<LevelSetSpec> {
    if !(alpha >= 0.0 && beta >= 0.0 && alpha.is_finite() && beta.is_finite()) {
        return Err(Error::domain(
            "alpha and beta must be finite and non-negative",
        ));
    }
    if !(a.is_finite() && b.is_finite() && a <= -1.0 && b >= 1.0) {
        return Err(Error::domain(format!(
            "need finite a <= -1 and b >= 1, got a = {a}, b = {b}"
        )));
    }
    let make = |lo, hi, case| LevelSetSpec {
        a,
        alpha,
        b,
        beta,
        lo,
        hi,
        case,
    };
    let system = |lo, hi| support_system(a, alpha, b, beta, lo, hi);
    let functional = |lo, hi| f_functional(a, alpha, b, beta, lo, hi);

    if let Some((lo, hi)) = newton_interior(a, alpha, b, beta) {
        return Ok(make(lo, hi, SupportCase::Interior));
    }

    let best = |candidates: Vec<(f64, f64)>| {
        candidates
            .into_iter()
            .max_by(|x, y| functional(x.0, x.1).total_cmp(&functional(y.0, y.1)))
    };

    let pin_a: Vec<(f64, f64)> = scan_roots(|hi| system(-1.0, hi).0 - 1.0, false)
        .into_iter()
        .filter(|&hi| {
            let (e1, e2) = system(-1.0, hi);
            (e1 - 1.0).abs() < RESIDUAL_TOL && e2 <= 1.0 + INEQUALITY_SLACK
        })
        .map(|hi| (-1.0, hi))
        .collect();
    if let Some((lo, hi)) = best(pin_a) {
        return Ok(make(lo, hi, SupportCase::PinA));
    }

    let pin_b: Vec<(f64, f64)> = scan_roots(|lo| system(lo, 1.0).1 - 1.0, true)
        .into_iter()
        .filter(|&lo| {
            let (e1, e2) = system(lo, 1.0);
            (e2 - 1.0).abs() < RESIDUAL_TOL && e1 <= 1.0 + INEQUALITY_SLACK
        })
        .map(|lo| (lo, 1.0))
        .collect();
    if let Some((lo, hi)) = best(pin_b) {
        return Ok(make(lo, hi, SupportCase::PinB));
    }

    let (e1, e2) = system(-1.0, 1.0);
    if e1 <= 1.0 + INEQUALITY_SLACK && e2 <= 1.0 + INEQUALITY_SLACK {
        return Ok(make(-1.0, 1.0, SupportCase::PinAB));
    }
    Err(Error::numeric(format!(
        "no active set satisfies the support system for a = {a}, alpha = {alpha}, b = {b}, beta = {beta}"
    )))
}

impl LevelSetSpec {
    /// Residuals of the system: equality defects on free endpoints,
    /// constraint violations (clamped at zero) on pinned ones.
    pub fn residuals(&self) -> (f64, f64) {
        let (e1, e2) = support_system(self.a, self.alpha, self.b, self.beta, self.lo, self.hi);
        let r1 = if self.hi < 1.0 {
            (e1 - 1.0).abs()
        } else {
            (e1 - 1.0).max(0.0)
        };
        let r2 = if self.lo > -1.0 {
            (e2 - 1.0).abs()
        } else {
            (e2 - 1.0).max(0.0)
        };
        (r1, r2)
    }

    pub fn level_value(&self, z: Complex64) -> f64 {
        self.log_level(z).exp()
    }

    /// `log L(z)`; `+inf` at a charged point.
    pub fn log_level(&self, z: Complex64) -> f64 {
        let p = phi(z, self.lo, self.hi);
        let mut value = -2.0 * p.norm().ln();
        for (c, e) in [(self.a, self.alpha), (self.b, self.beta)] {
            if e > 0.0 {
                let pc = phi(Complex64::new(c, 0.0), self.lo, self.hi);
                let den = p * (p - pc);
                if den.norm() == 0.0 {
                    return f64::INFINITY;
                }
                value += e * ((Complex64::new(1.0, 0.0) - p * pc).norm().ln() - den.norm().ln());
            }
        }
        value
    }

    /// `z` belongs to the closed level set `E_rho`.
    pub fn membership(&self, z: Complex64, rho: f64) -> bool {
        if z.im == 0.0 && z.re >= self.lo && z.re <= self.hi {
            return true;
        }
        self.log_level(z) >= -2.0 * rho.ln()
    }

    /// Predicted n-th root rate for a singularity at `z0`.
    pub fn predicted_rate(&self, z0: Complex64) -> f64 {
        if z0.im == 0.0 && z0.re >= self.lo && z0.re <= self.hi {
            return 1.0;
        }
        self.level_value(z0)
    }

    /// The level parameter `rho` whose boundary passes through `z0`.
    pub fn rho_through(&self, z0: Complex64) -> f64 {
        self.level_value(z0).powf(-0.5)
    }
}

/// Exterior conformal map of `[lo, hi]` onto `|w| > 1`.
///
/// The square root is taken as `sqrt(w-1) sqrt(w+1)`, which is analytic
/// off the cut and behaves like `w` at infinity; on the cut the limit
/// from the upper half-plane is returned.
pub fn phi(z: Complex64, lo: f64, hi: f64) -> Complex64 {
    let mut w = (2.0 * z - Complex64::new(lo + hi, 0.0)) / (hi - lo);
    if w.im == 0.0 {
        w.im = 0.0;
    }
    let one = Complex64::new(1.0, 0.0);
    let root = (w - one).sqrt() * (w + one).sqrt();
    let p = w + root;
    // guard against rounding into the unit disk
    if p.norm() < 1.0 {
        let q = w - root;
        if q.norm() > p.norm() {
            return q;
        }
    }
    p
}
