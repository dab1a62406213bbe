//! The full verification suite behind the `all` command.

use serde::Serialize;

use super::checks::{self, DivergenceRow, JacobianSummary, LemmaOneSummary, LemmaTwoRow, ReparametrizationRow};
use super::config::Config;
use super::fields;
use super::scenarios::{self, Scenario, TimeFunction};
use super::sweep::{self, SweepBase, SweepParam, SweepResult};
use super::verify::{self, LeibnizReport, TransportReport};
use crate::domain::{self, ValidationReport};
use crate::error::Result;
use crate::quadrature::QuadratureRule;

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub order: usize,
    /// Absolute finite-difference step for every transport check.
    pub h: f64,
    /// Random lateral nodes per scenario for the pointwise checks.
    pub samples: usize,
    pub seed: u64,
    /// Include the Monte Carlo convergence sweep (the slowest item).
    pub monte_carlo: bool,
    pub config: Config,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            order: 16,
            h: 1e-4,
            samples: 1000,
            seed: 20240601,
            monte_carlo: true,
            config: Config::default(),
        }
    }
}

impl SuiteOptions {
    /// Settings from a config file; missing keys keep their defaults.
    pub fn from_config(config: Config) -> Self {
        let d = SuiteOptions::default();
        SuiteOptions {
            order: config.order.unwrap_or(d.order),
            h: config.h.unwrap_or(d.h),
            samples: config.samples.unwrap_or(d.samples),
            seed: config.seed.unwrap_or(d.seed),
            monte_carlo: d.monte_carlo,
            config,
        }
    }
}

/// One summary line per suite section.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Criterion {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Closed-form `dI/dt` against both sides of a transport report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedFormRow {
    pub scenario: String,
    pub field: String,
    pub t: f64,
    pub reference_rate: f64,
    pub lhs_gap: f64,
    pub rhs_gap: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpecialCaseRow {
    pub name: String,
    pub expected: f64,
    pub observed: f64,
    pub gap: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationRow {
    pub scenario: String,
    pub report: ValidationReport,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub order: usize,
    pub h: f64,
    pub samples: usize,
    pub seed: u64,
    pub criteria: Vec<Criterion>,
    pub transport: Vec<TransportReport>,
    pub closed_forms: Vec<ClosedFormRow>,
    pub lemma_one: Vec<LemmaOneSummary>,
    pub jacobians: Vec<JacobianSummary>,
    pub lemma_two: Vec<LemmaTwoRow>,
    pub divergence: Vec<DivergenceRow>,
    pub leibniz: Vec<LeibnizReport>,
    pub special_cases: Vec<SpecialCaseRow>,
    pub sweeps: Vec<SweepResult>,
    pub reparametrization: Vec<ReparametrizationRow>,
    pub validation: Vec<ValidationRow>,
    pub passed: bool,
}

/// Registry scenarios with config tolerance overrides applied.
pub fn configured_registry(config: &Config) -> Vec<Scenario> {
    scenarios::registry()
        .into_iter()
        .map(|mut s| {
            config.apply_tolerance(&mut s);
            s
        })
        .collect()
}

/// Interior grid plus checkpoints, sorted, for the transport section.
pub fn transport_times(scenario: &Scenario) -> Vec<f64> {
    let mut times = scenario.interior_times(5);
    times.extend(scenario.checkpoints.iter().copied());
    times.sort_by(f64::total_cmp);
    times.dedup();
    times
}

pub fn transport_section(scenarios: &[Scenario], opts: &SuiteOptions) -> Result<Vec<TransportReport>> {
    let rule = QuadratureRule::gauss(opts.order);
    let mut out = Vec::new();
    for s in scenarios {
        out.extend(verify::verify_all_fields(s, &transport_times(s), opts.h, &rule)?);
    }
    Ok(out)
}

pub fn closed_form_rows(reports: &[TransportReport]) -> Vec<ClosedFormRow> {
    reports
        .iter()
        .filter_map(|r| {
            let q = r.diagnostics.reference_rate?;
            let scale = q.abs().max(1.0);
            let lhs_gap = (r.lhs - q).abs() / scale;
            let rhs_gap = (r.rhs - q).abs() / scale;
            Some(ClosedFormRow {
                scenario: r.scenario.clone(),
                field: r.field.clone(),
                t: r.t,
                reference_rate: q,
                lhs_gap,
                rhs_gap,
                tolerance: r.tolerance,
                passed: lhs_gap < r.tolerance && rhs_gap < r.tolerance,
            })
        })
        .collect()
}

/// The three endpoint-rule instances: static `(0,1)` with `x²`, `(t, 2+t²)`
/// with `x` at `t = 1`, and `(-t, t)` with `1` at `t = 1`.
pub fn leibniz_section(opts: &SuiteOptions) -> Result<Vec<LeibnizReport>> {
    let rule = QuadratureRule::gauss(opts.order);
    Ok(vec![
        verify::leibniz_check(
            &TimeFunction::constant(0.0),
            &TimeFunction::constant(1.0),
            &fields::first_squared(),
            0.0,
            opts.h,
            &rule,
        )?,
        verify::leibniz_check(
            &TimeFunction::linear(0.0, 1.0),
            &TimeFunction::quadratic(2.0, 0.0, 1.0),
            &fields::first_coordinate(),
            1.0,
            opts.h,
            &rule,
        )?,
        verify::leibniz_check(
            &TimeFunction::linear(0.0, -1.0),
            &TimeFunction::linear(0.0, 1.0),
            &fields::one(),
            1.0,
            opts.h,
            &rule,
        )?,
    ])
}

pub const LEIBNIZ_TOL: f64 = 1e-8;
pub const REYNOLDS_TOL: f64 = 1e-6;

/// Leibniz endpoint value `5`, and the Reynolds expanding-ball and
/// static-ball cases, against their closed forms.
pub fn special_case_rows(leibniz: &[LeibnizReport], opts: &SuiteOptions) -> Result<Vec<SpecialCaseRow>> {
    use std::f64::consts::PI;
    let row = |name: &str, expected: f64, observed: f64, tolerance: f64| {
        let gap = (observed - expected).abs();
        SpecialCaseRow {
            name: name.to_string(),
            expected,
            observed,
            gap,
            tolerance,
            passed: gap < tolerance,
        }
    };
    let mut rows = Vec::new();
    let targets = [0.0, 5.0, 2.0];
    let labels = ["static (0,1), x²", "(t, 2+t²), x, t=1", "(-t, t), 1, t=1"];
    for ((lr, expected), label) in leibniz.iter().zip(targets).zip(labels) {
        rows.push(row(&format!("leibniz endpoint sum {label}"), expected, lr.endpoint_formula, LEIBNIZ_TOL));
        rows.push(row(&format!("leibniz machinery boundary {label}"), expected, lr.rhs_boundary, LEIBNIZ_TOL));
        rows.push(row(&format!("leibniz lhs {label}"), expected, lr.lhs, LEIBNIZ_TOL.max(1e-6)));
    }

    let rule = QuadratureRule::gauss(opts.order);
    let ball = scenarios::scenario("expanding-ball")?;
    let one = verify::reynolds_check(&ball, "one", 0.0, opts.h, &rule)?;
    rows.push(row("reynolds expanding ball lhs, 1", 4.0 * PI, one.lhs, REYNOLDS_TOL));
    rows.push(row("reynolds expanding ball rhs, 1", 4.0 * PI, one.rhs, REYNOLDS_TOL));
    let x2 = verify::reynolds_check(&ball, "x2", 0.0, opts.h, &rule)?;
    rows.push(row("reynolds expanding ball rhs_bulk, x²", 0.0, x2.rhs_bulk, REYNOLDS_TOL));
    rows.push(row("reynolds expanding ball rhs_boundary, x²", 4.0 * PI / 3.0, x2.rhs_boundary, REYNOLDS_TOL));
    rows.push(row("reynolds expanding ball lhs, x²", 4.0 * PI / 3.0, x2.lhs, REYNOLDS_TOL));
    let fixed = scenarios::scenario("static-ball")?;
    let lin = verify::reynolds_check(&fixed, "linear-in-time", 0.5, opts.h, &rule)?;
    let g = 4.0 * PI / 3.0 + 4.0 * PI / 15.0;
    rows.push(row("reynolds static ball lhs, t(1+x²)", g, lin.lhs, REYNOLDS_TOL));
    rows.push(row("reynolds static ball rhs_boundary, t(1+x²)", 0.0, lin.rhs_boundary, REYNOLDS_TOL));
    Ok(rows)
}

pub const FD_SLOPE: (f64, f64) = (2.0, 0.2);
pub const MC_SLOPE: (f64, f64) = (-0.5, 0.1);
/// Finest-order error bound for the Gauss order sweep.
pub const ORDER_SWEEP_BOUND: f64 = 1e-10;

pub fn sweep_section(opts: &SuiteOptions) -> Result<Vec<SweepResult>> {
    let base = SweepBase {
        h: opts.h,
        order: opts.order,
        seed: opts.seed,
        ..SweepBase::default()
    };
    let disk = scenarios::scenario("shrinking-disk")?;
    let cap = scenarios::scenario("spherical-cap")?;
    let mut out = vec![
        sweep::run_sweep(&disk, "wave", 0.5, SweepParam::FdStep, &[1e-1, 1e-2, 1e-3, 1e-4], &base)?,
        sweep::run_sweep(&cap, "one", 0.0, SweepParam::QuadOrder, &[4.0, 8.0, 16.0, 32.0], &base)?,
    ];
    if opts.monte_carlo {
        out.push(sweep::run_sweep(
            &disk,
            "one",
            0.0,
            SweepParam::MonteCarlo,
            &[1e3, 1e4, 1e5, 1e6],
            &base,
        )?);
    }
    Ok(out)
}

fn worst<T>(items: &[T], f: impl Fn(&T) -> f64) -> f64 {
    items.iter().map(f).fold(0.0, f64::max)
}

fn all_pass<T>(items: &[T], f: impl Fn(&T) -> bool) -> bool {
    !items.is_empty() && items.iter().all(f)
}

pub fn run_suite(opts: &SuiteOptions) -> Result<SuiteReport> {
    let registry = configured_registry(&opts.config);
    let rule = QuadratureRule::gauss(opts.order);

    let transport = transport_section(&registry, opts)?;
    let closed_forms = closed_form_rows(&transport);
    let mut lemma_one = Vec::new();
    let mut jacobians = Vec::new();
    let mut lemma_two = Vec::new();
    let mut divergence = Vec::new();
    let mut validation = Vec::new();
    let mut reparametrization = Vec::new();
    for (i, s) in registry.iter().enumerate() {
        let seed = opts.seed.wrapping_add(i as u64);
        lemma_one.push(checks::lemma_one_check(s, opts.samples, seed)?);
        jacobians.push(checks::jacobian_factorization_check(s, opts.samples, seed)?);
        lemma_two.extend(checks::lemma_two_rows(s, &rule)?);
        if s.smooth {
            divergence.extend(checks::divergence_rows(s, &rule)?);
        }
        if s.alternate_boundary.is_some() {
            reparametrization.extend(checks::reparametrization_rows(s, &s.interior_times(5), 200, seed)?);
        }
        for t in s.uniform_times(5) {
            let report = domain::validate_scene(&s.domain, t, 200, seed)?;
            validation.push(ValidationRow {
                scenario: s.name.clone(),
                passed: report.passed(),
                report,
            });
        }
    }
    let leibniz = leibniz_section(opts)?;
    let special_cases = special_case_rows(&leibniz, opts)?;
    let sweeps = sweep_section(opts)?;

    let smooth_reports: Vec<&TransportReport> = transport
        .iter()
        .filter(|r| registry.iter().any(|s| s.name == r.scenario && s.smooth))
        .collect();
    let irregular_reports: Vec<&TransportReport> = transport
        .iter()
        .filter(|r| registry.iter().any(|s| s.name == r.scenario && !s.smooth))
        .collect();
    let sweep_of = |p: SweepParam| sweeps.iter().find(|s| s.param == p);
    let slope_ok = |s: Option<&SweepResult>, (target, width): (f64, f64)| {
        s.and_then(|s| s.slope).is_some_and(|k| (k - target).abs() <= width)
    };
    let order_ok = sweep_of(SweepParam::QuadOrder).is_some_and(|s| {
        s.monotone && s.points.last().is_some_and(|p| p.error < ORDER_SWEEP_BOUND)
    });
    let mc = sweep_of(SweepParam::MonteCarlo);

    let criteria = vec![
        Criterion {
            id: 1,
            name: "transport identity, smooth scenarios",
            passed: smooth_reports.iter().all(|r| r.passed)
                && all_pass(&closed_forms, |c| c.passed),
            detail: format!(
                "{} reports, worst rel_residual {:.3e}; {} closed forms, worst gap {:.3e}",
                smooth_reports.len(),
                smooth_reports.iter().map(|r| r.rel_residual).fold(0.0, f64::max),
                closed_forms.len(),
                worst(&closed_forms, |c| c.lhs_gap.max(c.rhs_gap)),
            ),
        },
        Criterion {
            id: 2,
            name: "transport identity, self-intersecting boundary",
            passed: !irregular_reports.is_empty() && irregular_reports.iter().all(|r| r.passed),
            detail: format!(
                "{} reports, worst rel_residual {:.3e}",
                irregular_reports.len(),
                irregular_reports.iter().map(|r| r.rel_residual).fold(0.0, f64::max)
            ),
        },
        Criterion {
            id: 3,
            name: "space-time exterior normal",
            passed: all_pass(&lemma_one, |r| r.passed),
            detail: format!(
                "unit {:.2e}, tangency {:.2e}, frame {:.2e}, min w·n {:.3}",
                worst(&lemma_one, |r| r.unit_defect),
                worst(&lemma_one, |r| r.tangency_residual),
                worst(&lemma_one, |r| r.frame_residual),
                lemma_one.iter().map(|r| r.normal_alignment).fold(f64::INFINITY, f64::min)
            ),
        },
        Criterion {
            id: 4,
            name: "space-time Jacobian factorization",
            passed: all_pass(&jacobians, |r| r.passed),
            detail: format!("worst relative gap {:.2e}", worst(&jacobians, |r| r.max_relative_gap)),
        },
        Criterion {
            id: 5,
            name: "lateral integral as iterated integral",
            passed: all_pass(&lemma_two, |r| r.passed),
            detail: format!(
                "{} rows, worst gap/bound {:.3}",
                lemma_two.len(),
                worst(&lemma_two, |r| r.gap / r.bound)
            ),
        },
        Criterion {
            id: 6,
            name: "divergence theorem on space-time set",
            passed: all_pass(&divergence, |r| r.passed),
            detail: format!(
                "{} rows, worst residual {:.2e}",
                divergence.len(),
                worst(&divergence, |r| r.balance.residual)
            ),
        },
        Criterion {
            id: 7,
            name: "Leibniz and Reynolds special cases",
            passed: all_pass(&special_cases, |r| r.passed)
                && leibniz.iter().all(|l| l.boundary_gap < LEIBNIZ_TOL),
            detail: format!("worst gap {:.2e}", worst(&special_cases, |r| r.gap)),
        },
        Criterion {
            id: 8,
            name: "convergence orders",
            passed: slope_ok(sweep_of(SweepParam::FdStep), FD_SLOPE)
                && order_ok
                && (!opts.monte_carlo || slope_ok(mc, MC_SLOPE)),
            detail: format!(
                "fd slope {}, gauss order monotone {}, mc slope {}",
                fmt_slope(sweep_of(SweepParam::FdStep)),
                order_ok,
                if opts.monte_carlo { fmt_slope(mc) } else { "skipped".into() }
            ),
        },
        Criterion {
            id: 9,
            name: "reparametrization invariance of normal velocity",
            passed: all_pass(&reparametrization, |r| r.passed),
            detail: format!("worst gap {:.2e}", worst(&reparametrization, |r| r.gap)),
        },
        Criterion {
            id: 10,
            name: "scene validation",
            passed: all_pass(&validation, |r| r.passed),
            detail: format!(
                "{} of {} scene reports pass",
                validation.iter().filter(|r| r.passed).count(),
                validation.len()
            ),
        },
    ];
    let passed = criteria.iter().all(|c| c.passed);
    Ok(SuiteReport {
        order: opts.order,
        h: opts.h,
        samples: opts.samples,
        seed: opts.seed,
        criteria,
        transport,
        closed_forms,
        lemma_one,
        jacobians,
        lemma_two,
        divergence,
        leibniz,
        special_cases,
        sweeps,
        reparametrization,
        validation,
        passed,
    })
}

fn fmt_slope(s: Option<&SweepResult>) -> String {
    match s.and_then(|s| s.slope) {
        Some(k) => format!("{k:.3}"),
        None => "n/a".into(),
    }
}
