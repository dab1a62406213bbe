//! Both sides of the transport identity
//! `d/dt ∫_{O_t} φ = ∫_{O_t} φ' + ∫_{∂*O_t} φ V∂`.

use serde::Serialize;

use super::scenarios::{interval_domain, NamedField, Scenario, TimeFunction};
use crate::domain::ScalarField;
use crate::error::{Result, TransportError};
use crate::integration;
use crate::quadrature::{IntegralEstimate, QuadratureRule};

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub rule: QuadratureRuleSummary,
    pub h: f64,
    pub lhs_error_indicator: f64,
    pub bulk_error_indicator: f64,
    pub boundary_error_indicator: f64,
    /// Closed-form `dI/dt` when the scenario supplies one.
    pub reference_rate: Option<f64>,
    pub convergence_slope: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct QuadratureRuleSummary {
    pub kind: &'static str,
    pub order_or_count: usize,
    pub seed: u64,
}

impl From<&QuadratureRule> for QuadratureRuleSummary {
    fn from(rule: &QuadratureRule) -> Self {
        QuadratureRuleSummary {
            kind: if rule.is_gauss() { "gauss_tensor" } else { "monte_carlo" },
            order_or_count: rule.order_or_count,
            seed: rule.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportReport {
    pub scenario: String,
    pub field: String,
    pub t: f64,
    pub lhs: f64,
    pub rhs_bulk: f64,
    pub rhs_boundary: f64,
    pub rhs: f64,
    pub abs_residual: f64,
    pub rel_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Error kind and message when a component failed; the numbers are then NaN.
    pub failure: Option<String>,
    pub diagnostics: Diagnostics,
}

fn check_step(scenario: &Scenario, t: f64, h: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(TransportError::InvalidInput(format!("step h must be positive, got {h}")));
    }
    let (lo, hi) = scenario.time_window;
    if t - h < lo || t + h > hi {
        return Err(TransportError::WindowExceeded {
            lo: t - h,
            hi: t + h,
            window_min: lo,
            window_max: hi,
        });
    }
    Ok(())
}

/// `[I(t+h) − I(t−h)] / 2h` with `I(s) = ∫_{O_s} φ(s, ·)`.
pub fn lhs_time_derivative(
    scenario: &Scenario,
    field: &ScalarField,
    t: f64,
    h: f64,
    rule: &QuadratureRule,
) -> Result<IntegralEstimate> {
    check_step(scenario, t, h)?;
    let plus = integration::integrate_domain(&scenario.domain, t + h, field, rule)?;
    let minus = integration::integrate_domain(&scenario.domain, t - h, field, rule)?;
    Ok(IntegralEstimate {
        value: (plus.value - minus.value) / (2.0 * h),
        error_indicator: (plus.error_indicator + minus.error_indicator) / (2.0 * h),
    })
}

/// `(∫_{O_t} φ', ∫_{∂*O_t} φ V∂)`.
pub fn rhs_transport(
    scenario: &Scenario,
    field: &ScalarField,
    t: f64,
    rule: &QuadratureRule,
) -> Result<(IntegralEstimate, IntegralEstimate)> {
    if !scenario.contains_time(t) {
        return Err(TransportError::WindowExceeded {
            lo: t,
            hi: t,
            window_min: scenario.time_window.0,
            window_max: scenario.time_window.1,
        });
    }
    let domain = &scenario.domain;
    let bulk = integration::integrate_over_domain(domain, t, rule, |x| field.time_partial(t, x))?;
    let boundary = integration::integrate_boundary(
        domain,
        t,
        |g| Ok(field.value(t, &g.point)? * g.normal_velocity),
        rule,
    )?;
    Ok((bulk, boundary))
}

/// Both sides of the transport identity for one named field at time `t`.
///
/// Invalid requests (unknown field, `t ± h` outside the window, `h ≤ 0`) are
/// errors; numerical failures inside a component produce a failed report.
pub fn verify_transport(
    scenario: &Scenario,
    field_name: &str,
    t: f64,
    h: f64,
    rule: &QuadratureRule,
) -> Result<TransportReport> {
    let named = scenario.field(field_name)?;
    check_step(scenario, t, h)?;
    Ok(verify_named(scenario, named, t, h, rule))
}

fn verify_named(
    scenario: &Scenario,
    named: &NamedField,
    t: f64,
    h: f64,
    rule: &QuadratureRule,
) -> TransportReport {
    let tolerance = scenario.tolerance_at(t);
    let mut report = TransportReport {
        scenario: scenario.name.clone(),
        field: named.name.clone(),
        t,
        lhs: f64::NAN,
        rhs_bulk: f64::NAN,
        rhs_boundary: f64::NAN,
        rhs: f64::NAN,
        abs_residual: f64::NAN,
        rel_residual: f64::NAN,
        tolerance,
        passed: false,
        failure: None,
        diagnostics: Diagnostics {
            rule: rule.into(),
            h,
            reference_rate: named.reference.as_ref().map(|r| (r.derivative)(t)),
            ..Diagnostics::default()
        },
    };
    let sides = lhs_time_derivative(scenario, &named.field, t, h, rule)
        .and_then(|lhs| Ok((lhs, rhs_transport(scenario, &named.field, t, rule)?)));
    match sides {
        Ok((lhs, (bulk, boundary))) => {
            let rhs = bulk.value + boundary.value;
            let abs = (lhs.value - rhs).abs();
            let rel = abs / lhs.value.abs().max(1.0);
            report.lhs = lhs.value;
            report.rhs_bulk = bulk.value;
            report.rhs_boundary = boundary.value;
            report.rhs = rhs;
            report.abs_residual = abs;
            report.rel_residual = rel;
            report.passed = rel < tolerance;
            report.diagnostics.lhs_error_indicator = lhs.error_indicator;
            report.diagnostics.bulk_error_indicator = bulk.error_indicator;
            report.diagnostics.boundary_error_indicator = boundary.error_indicator;
        }
        Err(e) => report.failure = Some(format!("{}: {e}", e.kind())),
    }
    report
}

/// Reports for every field of the scenario at each of `times`.
pub fn verify_all_fields(
    scenario: &Scenario,
    times: &[f64],
    h: f64,
    rule: &QuadratureRule,
) -> Result<Vec<TransportReport>> {
    let mut out = Vec::new();
    for &t in times {
        check_step(scenario, t, h)?;
        for named in &scenario.fields {
            out.push(verify_named(scenario, named, t, h, rule));
        }
    }
    Ok(out)
}

/// The transport identity on a flat open subset of `R³`, where `V∂ = v·n`.
pub fn reynolds_check(
    scenario: &Scenario,
    field_name: &str,
    t: f64,
    h: f64,
    rule: &QuadratureRule,
) -> Result<TransportReport> {
    let d = &scenario.domain;
    if !(scenario.is_flat() && d.dim() == 3 && d.ambient_dim() == 3) {
        return Err(TransportError::InvalidInput(format!(
            "scenario {} is not an open subset of flat 3-space",
            scenario.name
        )));
    }
    verify_transport(scenario, field_name, t, h, rule)
}

/// The one-dimensional case on `M = R`, where the boundary integral is the
/// signed endpoint sum `φ(b) b' − φ(a) a'`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeibnizReport {
    pub t: f64,
    pub h: f64,
    pub a: f64,
    pub b: f64,
    pub lhs: f64,
    pub rhs_bulk: f64,
    /// Boundary integral computed by the general machinery (normals by probing).
    pub rhs_boundary: f64,
    pub endpoint_formula: f64,
    /// `|rhs_boundary − endpoint_formula|`
    pub boundary_gap: f64,
    /// `|lhs − (rhs_bulk + endpoint_formula)| / max(1, |lhs|)`
    pub rel_residual: f64,
}

pub fn leibniz_check(
    a: &TimeFunction,
    b: &TimeFunction,
    field: &ScalarField,
    t: f64,
    h: f64,
    rule: &QuadratureRule,
) -> Result<LeibnizReport> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(TransportError::InvalidInput(format!("step h must be positive, got {h}")));
    }
    let (at, bt) = (a.at(t), b.at(t));
    if !(bt - at >= 10.0 * h) {
        return Err(TransportError::DegenerateInterval {
            length: bt - at,
            limit: 10.0 * h,
        });
    }
    let ends = [a.at(t - h), a.at(t + h), b.at(t - h), b.at(t + h)];
    let lo = ends.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ends.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let margin = 1.0 + 0.5 * (hi - lo);
    let domain = interval_domain(a.clone(), b.clone(), (lo - margin, hi + margin));
    let scenario = Scenario::new("leibniz", "", domain, (t - h - 1.0, t + h + 1.0));

    let lhs = lhs_time_derivative(&scenario, field, t, h, rule)?.value;
    let (bulk, boundary) = rhs_transport(&scenario, field, t, rule)?;
    let endpoint_formula = field.value(t, &point(bt))? * b.rate(t) - field.value(t, &point(at))? * a.rate(t);
    Ok(LeibnizReport {
        t,
        h,
        a: at,
        b: bt,
        lhs,
        rhs_bulk: bulk.value,
        rhs_boundary: boundary.value,
        endpoint_formula,
        boundary_gap: (boundary.value - endpoint_formula).abs(),
        rel_residual: (lhs - bulk.value - endpoint_formula).abs() / lhs.abs().max(1.0),
    })
}

fn point(x: f64) -> nalgebra::DVector<f64> {
    nalgebra::DVector::from_element(1, x)
}
