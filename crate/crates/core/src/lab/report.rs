//! Machine-readable reports (JSON and CSV, floats with 17 significant
//! digits) and plain-text tables.

use std::fmt::Write as _;
use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use super::sweep::SweepResult;
use super::verify::TransportReport;
use crate::error::{Result, TransportError};

/// Pretty JSON with every float written as `d.dddddddddddddddde±x`.
struct ScientificFormatter<'a> {
    inner: PrettyFormatter<'a>,
}

impl Formatter for ScientificFormatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{}", sci(value))
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

/// 17 significant digits; non-finite values become `null`/empty upstream.
pub fn sci(value: f64) -> String {
    if value.is_finite() {
        format!("{value:.16e}")
    } else {
        "null".to_string()
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let fmt = ScientificFormatter {
        inner: PrettyFormatter::with_indent(b"  "),
    };
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, fmt);
    value
        .serialize(&mut ser)
        .map_err(|e| TransportError::Config(format!("json serialization failed: {e}")))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| TransportError::Config(e.to_string()))
}

fn csv_float(value: f64) -> String {
    if value.is_finite() {
        format!("{value:.16e}")
    } else {
        String::new()
    }
}

fn csv_option(value: Option<f64>) -> String {
    value.map(csv_float).unwrap_or_default()
}

const TRANSPORT_COLUMNS: [&str; 23] = [
    "scenario",
    "field",
    "t",
    "lhs",
    "rhs_bulk",
    "rhs_boundary",
    "rhs",
    "abs_residual",
    "rel_residual",
    "tolerance",
    "passed",
    "failure",
    "rule",
    "order_or_count",
    "seed",
    "h",
    "lhs_error_indicator",
    "bulk_error_indicator",
    "boundary_error_indicator",
    "reference_rate",
    "convergence_slope",
    "reference_gap",
    "status",
];

fn finish_csv(writer: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = writer
        .into_inner()
        .map_err(|e| TransportError::Config(format!("csv output failed: {e}")))?;
    String::from_utf8(bytes).map_err(|e| TransportError::Config(e.to_string()))
}

fn csv_error(e: csv::Error) -> TransportError {
    TransportError::Config(format!("csv output failed: {e}"))
}

/// One row per (scenario, field, t) with every report field.
pub fn transport_csv(reports: &[TransportReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRANSPORT_COLUMNS).map_err(csv_error)?;
    for r in reports {
        let d = &r.diagnostics;
        let reference_gap = d.reference_rate.map(|q| (r.lhs - q).abs());
        w.write_record([
            r.scenario.clone(),
            r.field.clone(),
            csv_float(r.t),
            csv_float(r.lhs),
            csv_float(r.rhs_bulk),
            csv_float(r.rhs_boundary),
            csv_float(r.rhs),
            csv_float(r.abs_residual),
            csv_float(r.rel_residual),
            csv_float(r.tolerance),
            r.passed.to_string(),
            r.failure.clone().unwrap_or_default(),
            d.rule.kind.to_string(),
            d.rule.order_or_count.to_string(),
            d.rule.seed.to_string(),
            csv_float(d.h),
            csv_float(d.lhs_error_indicator),
            csv_float(d.bulk_error_indicator),
            csv_float(d.boundary_error_indicator),
            csv_option(d.reference_rate),
            csv_option(d.convergence_slope),
            csv_option(reference_gap),
            status(r).to_string(),
        ])
        .map_err(csv_error)?;
    }
    finish_csv(w)
}

/// One row per grid point of a sweep.
pub fn sweep_csv(result: &SweepResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "scenario",
        "field",
        "t",
        "param",
        "value",
        "estimate",
        "error",
        "reference",
        "reference_kind",
        "rel_residual",
        "slope",
    ])
    .map_err(csv_error)?;
    let param = serde_json::to_value(result.param)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default();
    for p in &result.points {
        w.write_record([
            result.scenario.clone(),
            result.field.clone(),
            csv_float(result.t),
            param.clone(),
            csv_float(p.value),
            csv_float(p.estimate),
            csv_float(p.error),
            csv_float(result.reference),
            result.reference_kind.to_string(),
            csv_option(p.report.as_ref().map(|r| r.rel_residual)),
            csv_option(result.slope),
        ])
        .map_err(csv_error)?;
    }
    finish_csv(w)
}

fn status(r: &TransportReport) -> &'static str {
    match (r.passed, r.failure.is_some()) {
        (_, true) => "error",
        (true, false) => "pass",
        (false, false) => "FAIL",
    }
}

/// Aligned plain-text table of transport reports.
pub fn transport_table(reports: &[TransportReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<20} {:<15} {:>9} {:>17} {:>17} {:>17} {:>10} {:>8}  status",
        "scenario", "field", "t", "lhs", "rhs_bulk", "rhs_boundary", "rel_res", "tol"
    );
    for r in reports {
        let _ = writeln!(
            out,
            "{:<20} {:<15} {:>9.4} {:>17.10e} {:>17.10e} {:>17.10e} {:>10.2e} {:>8.0e}  {}",
            r.scenario,
            r.field,
            r.t,
            r.lhs,
            r.rhs_bulk,
            r.rhs_boundary,
            r.rel_residual,
            r.tolerance,
            status(r)
        );
        if let Some(f) = &r.failure {
            let _ = writeln!(out, "    {f}");
        }
    }
    out
}

pub fn sweep_table(result: &SweepResult) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} / {} at t = {}  (reference {}: {:.16e})",
        result.scenario, result.field, result.t, result.reference_kind, result.reference
    );
    let _ = writeln!(out, "{:>14} {:>24} {:>12}", "value", "estimate", "error");
    for p in &result.points {
        let _ = writeln!(out, "{:>14.6e} {:>24.16e} {:>12.4e}", p.value, p.estimate, p.error);
    }
    match result.slope {
        Some(s) => {
            let _ = writeln!(out, "fitted slope {s:.4}, monotone {}", result.monotone);
        }
        None => {
            let _ = writeln!(out, "fitted slope unavailable, monotone {}", result.monotone);
        }
    }
    out
}
