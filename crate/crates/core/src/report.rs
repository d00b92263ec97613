//! Report and trace export.
//!
//! Every float is written with 17 significant digits (`{:.16e}`) so identical
//! runs produce byte-identical files and values round-trip exactly.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::Formatter;

use crate::certificate::Certificate;
use crate::error::Result;
use crate::metric::Point;
use crate::solver::{ConvergenceReport, OrbitTrace};

/// Formats a float with 17 significant digits; non-finite values become
/// `nan`, `inf` or `-inf`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// serde_json formatter that prints floats via [`fmt_f64`] (non-finite as
/// `null`, which is all JSON allows).
struct SigDigits;

impl Formatter for SigDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            w.write_all(fmt_f64(value).as_bytes())
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
}

/// Serializes `value` as single-line JSON followed by a newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigits);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// Orbit trace as CSV: `n, x_n` (or `x_n_0, x_n_1, ...` for vectors),
/// `step_dist, tail_diam`. Row 0 has an empty step distance.
pub fn trace_csv<P: Point>(trace: &OrbitTrace<P>) -> String {
    let dim = trace.points.first().map_or(1, |p| p.coords().len());
    let mut out = String::from("n,");
    if dim == 1 {
        out.push_str("x_n,");
    } else {
        for k in 0..dim {
            out.push_str(&format!("x_n_{k},"));
        }
    }
    out.push_str("step_dist,tail_diam\n");
    for (n, p) in trace.points.iter().enumerate() {
        out.push_str(&n.to_string());
        for c in p.coords() {
            out.push(',');
            out.push_str(&fmt_f64(c));
        }
        out.push(',');
        if n > 0 {
            out.push_str(&fmt_f64(trace.step_dists[n - 1]));
        }
        out.push(',');
        out.push_str(&fmt_f64(trace.tail_diams[n]));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct ReportView<'a> {
    verdict: crate::solver::SolveVerdict,
    limit: Option<Vec<f64>>,
    final_residual: Option<f64>,
    iterations: usize,
    tail_limit_estimate: f64,
    escape_radius: f64,
    map: &'a str,
    x0: Vec<f64>,
    tol: f64,
    diagnostics: &'a [Certificate],
}

/// Convergence report as JSON.
pub fn report_json<P: Point>(report: &ConvergenceReport<P>, map_label: &str, x0: &P, tol: f64) -> Result<String> {
    report_json_with(report, map_label, x0, tol, &[])
}

/// Convergence report as JSON, with extra certificates (such as the orbit's
/// contraction inequality) under `diagnostics`.
pub fn report_json_with<P: Point>(
    report: &ConvergenceReport<P>,
    map_label: &str,
    x0: &P,
    tol: f64,
    diagnostics: &[Certificate],
) -> Result<String> {
    to_json(&ReportView {
        verdict: report.verdict,
        limit: report.limit.as_ref().map(Point::coords),
        final_residual: report.final_residual,
        iterations: report.iterations,
        tail_limit_estimate: report.tail_limit_estimate,
        escape_radius: report.escape_radius,
        map: map_label,
        x0: x0.coords(),
        tol,
        diagnostics,
    })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// A certificate tree flattened to CSV, one row per node in depth-first
/// order. `check` is the slash-joined path from the root.
pub fn certificate_csv(cert: &Certificate) -> String {
    fn walk(c: &Certificate, prefix: &str, out: &mut String) {
        let path = if prefix.is_empty() {
            c.check.clone()
        } else {
            format!("{prefix}/{}", c.check)
        };
        let verdict = serde_json::to_value(c.verdict)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default();
        let (lhs, rhs) = c
            .witness
            .as_ref()
            .map_or((String::new(), String::new()), |w| (fmt_f64(w.lhs), fmt_f64(w.rhs)));
        out.push_str(&format!(
            "{},{verdict},{},{lhs},{rhs},{}\n",
            csv_field(&path),
            c.conditional,
            csv_field(&c.note)
        ));
        for child in &c.children {
            walk(child, &path, out);
        }
    }
    let mut out = String::from("check,verdict,conditional,witness_lhs,witness_rhs,note\n");
    walk(cert, "", &mut out);
    out
}
