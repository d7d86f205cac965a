//! Machine-readable output: JSON with 17 significant digits and plain CSV.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::potential::ContourSet;
use crate::rulegen::GenGaussRule;
use crate::spline::SplineData;

/// `x` with 17 significant digits, `'.'` decimal separator.
pub fn float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Pretty JSON formatter that writes every float with 17 significant
/// digits; non-finite floats become `null`.
pub struct FullPrecision<'a> {
    inner: PrettyFormatter<'a>,
}

impl Default for FullPrecision<'_> {
    fn default() -> Self {
        FullPrecision {
            inner: PrettyFormatter::new(),
        }
    }
}

impl Formatter for FullPrecision<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object_value(writer)
    }
}

/// Serializes `value` as pretty JSON with full-precision floats and a
/// trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FullPrecision::default());
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}

/// `kind,index,abscissa,order,weight`, one row per rule entry. Right
/// weights are the positive `R_j`, the evaluation sign `(-1)^j` is not
/// folded in.
pub fn rule_csv(rule: &GenGaussRule) -> String {
    let mut out = String::from("kind,index,abscissa,order,weight\n");
    if let Some(a) = rule.a {
        for (j, &w) in rule.left_weights.iter().enumerate() {
            out.push_str(&format!("left,{j},{},{j},{}\n", float(a), float(w)));
        }
    }
    for (k, (&t, &w)) in rule.nodes.iter().zip(&rule.interior_weights).enumerate() {
        out.push_str(&format!("interior,{},{},0,{}\n", k + 1, float(t), float(w)));
    }
    if let Some(b) = rule.b {
        for (j, &w) in rule.right_weights.iter().enumerate() {
            out.push_str(&format!("right,{j},{},{j},{}\n", float(b), float(w)));
        }
    }
    out
}

/// `rho,component,x,y`, one row per polyline vertex.
pub fn contour_csv(sets: &[ContourSet]) -> String {
    let mut out = String::from("rho,component,x,y\n");
    for set in sets {
        for line in &set.polylines {
            for &(x, y) in &line.points {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    float(set.rho),
                    line.component,
                    float(x),
                    float(y)
                ));
            }
        }
    }
    out
}

/// `t,sigma` samples of a spline.
pub fn spline_csv(spline: &SplineData, count: usize) -> String {
    let mut out = String::from("t,sigma\n");
    for (t, v) in spline.sample(count) {
        out.push_str(&format!("{},{}\n", float(t), float(v)));
    }
    out
}
