//! The `--measure` mini-grammar: `jacobi:p,q`, `laguerre:p`,
//! `density:<expr>:<lo>:<hi>`.

use gengauss::exprcalc::{self, Expr};
use gengauss::measures::{self, RecurrenceMeasure, DEFAULT_CAPACITY};
use gengauss::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum MeasureArg {
    Jacobi { p: f64, q: f64 },
    Laguerre { p: f64 },
    Density { expr: Expr, lo: f64, hi: f64 },
}

fn number(text: &str, what: &str) -> Result<f64> {
    text.trim()
        .parse::<f64>()
        .map_err(|_| Error::Domain(format!("measure: cannot read {what} from {text:?}")))
}

impl MeasureArg {
    pub fn parse(text: &str) -> Result<Self> {
        let (family, rest) = text.split_once(':').ok_or_else(|| {
            Error::Domain(format!("measure: expected family:parameters, got {text:?}"))
        })?;
        match family.trim().to_ascii_lowercase().as_str() {
            "jacobi" => {
                let (p, q) = rest
                    .split_once(',')
                    .ok_or_else(|| Error::Domain("measure: jacobi needs p,q".into()))?;
                Ok(MeasureArg::Jacobi {
                    p: number(p, "p")?,
                    q: number(q, "q")?,
                })
            }
            "laguerre" => Ok(MeasureArg::Laguerre {
                p: number(rest, "p")?,
            }),
            "density" => {
                let mut parts = rest.rsplitn(3, ':');
                let hi = parts.next();
                let lo = parts.next();
                let expr = parts.next();
                let (Some(expr), Some(lo), Some(hi)) = (expr, lo, hi) else {
                    return Err(Error::Domain(
                        "measure: density needs <expr>:<lo>:<hi>".into(),
                    ));
                };
                Ok(MeasureArg::Density {
                    expr: exprcalc::parse(expr)?,
                    lo: number(lo, "lo")?,
                    hi: number(hi, "hi")?,
                })
            }
            other => Err(Error::Domain(format!("measure: unknown family {other:?}"))),
        }
    }

    /// Support of the measure before any coefficients are computed.
    pub fn support(&self) -> (f64, f64) {
        match self {
            MeasureArg::Jacobi { .. } => (-1.0, 1.0),
            MeasureArg::Laguerre { .. } => (0.0, f64::INFINITY),
            MeasureArg::Density { lo, hi, .. } => (*lo, *hi),
        }
    }

    /// Builds the measure with at least `needed` recurrence coefficients.
    pub fn build(&self, needed: usize) -> Result<RecurrenceMeasure> {
        match self {
            MeasureArg::Jacobi { p, q } => {
                measures::jacobi_measure_with_capacity(*p, *q, needed.max(DEFAULT_CAPACITY))
            }
            MeasureArg::Laguerre { p } => {
                measures::laguerre_measure_with_capacity(*p, needed.max(DEFAULT_CAPACITY))
            }
            MeasureArg::Density { expr, lo, hi } => {
                let k_max = needed.max(1);
                measures::stieltjes_from_density(|t| expr.eval(t), *lo, *hi, k_max)
            }
        }
    }
}

/// Coefficients needed to build `Q_{n,r,s}` and check it.
pub fn coefficients_needed(n: usize, r: usize, s: usize) -> usize {
    let rule = n + r + s + gengauss::rulegen::auxiliary_points(n, r, s);
    let check = n + (r + s).div_ceil(2) + 2;
    rule.max(check) + 1
}
