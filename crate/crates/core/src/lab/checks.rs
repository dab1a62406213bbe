//! Sampled pointwise checks of the space-time geometry, and the integral
//! identities on `W`, run scenario by scenario.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::scenarios::Scenario;
use crate::domain::ScalarField;
use crate::error::{Result, TransportError};
use crate::geometry::{self, BoundaryGeometry};
use crate::quadrature::QuadratureRule;
use crate::spacetime::{self, DivergenceBalance};

/// Nodes closer than this multiple of the probe distance to a declared
/// self-intersection are skipped.
const EXCEPTIONAL_MARGIN: f64 = 10.0;

/// Random lateral nodes `(s, chart, z)` with their boundary geometry; nodes
/// near declared exceptional points are counted and dropped.
fn sample_lateral(
    scenario: &Scenario,
    nodes: usize,
    seed: u64,
) -> Result<(Vec<BoundaryGeometry>, usize)> {
    let domain = &scenario.domain;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = scenario.time_window;
    let radius = EXCEPTIONAL_MARGIN * domain.tolerances.probe_eps;
    let mut kept = Vec::with_capacity(nodes);
    let mut skipped = 0;
    for i in 0..nodes {
        let s = lo + (hi - lo) * rng.gen::<f64>();
        let c = i % domain.boundary.charts.len();
        let chart = &domain.boundary.charts[c];
        let unit: Vec<f64> = (0..chart.dim()).map(|_| rng.gen::<f64>()).collect();
        let z = chart.from_unit(&unit);
        let p = domain.boundary.point(s, c, &z)?;
        if domain.distance_to_exceptional(s, &p) < radius {
            skipped += 1;
            continue;
        }
        kept.push(geometry::boundary_geometry(domain, s, c, &z)?);
    }
    Ok((kept, skipped))
}

/// Worst observed values of the exterior-normal characterization of `W`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaOneSummary {
    pub scenario: String,
    pub nodes: usize,
    pub skipped: usize,
    /// `max ||w| − 1|`
    pub unit_defect: f64,
    /// `max |w·(V∂ n + t̂)|`
    pub tangency_residual: f64,
    /// `min w·n`
    pub normal_alignment: f64,
    /// `max |(w − (w·t̂) t̂)·τ|` over unit boundary tangents `τ`
    pub frame_residual: f64,
    pub passed: bool,
}

pub const LEMMA_ONE_UNIT_TOL: f64 = 1e-10;
pub const LEMMA_ONE_TANGENCY_TOL: f64 = 1e-8;

pub fn lemma_one_check(scenario: &Scenario, nodes: usize, seed: u64) -> Result<LemmaOneSummary> {
    let (geoms, skipped) = sample_lateral(scenario, nodes, seed)?;
    let mut out = LemmaOneSummary {
        scenario: scenario.name.clone(),
        nodes: geoms.len(),
        skipped,
        unit_defect: 0.0,
        tangency_residual: 0.0,
        normal_alignment: f64::INFINITY,
        frame_residual: 0.0,
        passed: false,
    };
    for g in &geoms {
        let c = spacetime::check_lateral_normal(g);
        out.unit_defect = out.unit_defect.max(c.unit_defect);
        out.tangency_residual = out.tangency_residual.max(c.tangency_residual);
        out.normal_alignment = out.normal_alignment.min(c.normal_alignment);
        out.frame_residual = out.frame_residual.max(c.frame_residual);
    }
    out.passed = !geoms.is_empty()
        && out.unit_defect < LEMMA_ONE_UNIT_TOL
        && out.tangency_residual < LEMMA_ONE_TANGENCY_TOL
        && out.normal_alignment > 0.0
        && out.frame_residual < LEMMA_ONE_TANGENCY_TOL;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JacobianSummary {
    pub scenario: String,
    pub nodes: usize,
    pub skipped: usize,
    /// `max |J_F_direct − √(1+V∂²) J_f| / J_F_direct`
    pub max_relative_gap: f64,
    pub passed: bool,
}

pub const JACOBIAN_TOL: f64 = 1e-8;

pub fn jacobian_factorization_check(
    scenario: &Scenario,
    nodes: usize,
    seed: u64,
) -> Result<JacobianSummary> {
    let (geoms, skipped) = sample_lateral(scenario, nodes, seed)?;
    let rank_tol = scenario.domain.tolerances.rank_tol;
    let mut worst: f64 = 0.0;
    for g in &geoms {
        worst = worst.max(spacetime::jacobians_from(g, rank_tol)?.relative_gap());
    }
    Ok(JacobianSummary {
        scenario: scenario.name.clone(),
        nodes: geoms.len(),
        skipped,
        max_relative_gap: worst,
        passed: !geoms.is_empty() && worst < JACOBIAN_TOL,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaTwoRow {
    pub scenario: String,
    pub field: String,
    pub t0: f64,
    pub t: f64,
    pub direct: f64,
    pub iterated: f64,
    pub gap: f64,
    /// `1e-8 (1 + |direct|)`
    pub bound: f64,
    pub passed: bool,
}

pub const LEMMA_TWO_TOL: f64 = 1e-8;

/// Lateral integral of `field` over `(t0, t)` by the space-time area formula
/// and as an iterated integral.
pub fn lemma_two_check(
    scenario: &Scenario,
    field_name: &str,
    field: &ScalarField,
    t0: f64,
    t: f64,
    rule: &QuadratureRule,
) -> Result<LemmaTwoRow> {
    let direct = spacetime::lateral_integral_direct(&scenario.domain, t0, t, field, rule)?.value;
    let iterated = spacetime::lateral_integral_iterated(&scenario.domain, t0, t, field, rule)?.value;
    let gap = (direct - iterated).abs();
    let bound = LEMMA_TWO_TOL * (1.0 + direct.abs());
    Ok(LemmaTwoRow {
        scenario: scenario.name.clone(),
        field: field_name.to_string(),
        t0,
        t,
        direct,
        iterated,
        gap,
        bound,
        passed: gap < bound,
    })
}

/// Direct versus iterated lateral integrals for every scenario field over the whole window.
pub fn lemma_two_rows(scenario: &Scenario, rule: &QuadratureRule) -> Result<Vec<LemmaTwoRow>> {
    let (t0, t) = scenario.time_window;
    scenario
        .fields
        .iter()
        .map(|f| lemma_two_check(scenario, &f.name, &f.field, t0, t, rule))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceRow {
    pub scenario: String,
    pub field: String,
    pub t0: f64,
    pub t: f64,
    pub balance: DivergenceBalance,
    pub passed: bool,
}

pub const DIVERGENCE_TOL: f64 = 1e-6;

/// Divergence theorem on `W` over the whole window for each of the
/// scenario's test fields.
pub fn divergence_rows(scenario: &Scenario, rule: &QuadratureRule) -> Result<Vec<DivergenceRow>> {
    let (t0, t) = scenario.time_window;
    scenario
        .divergence_fields
        .iter()
        .map(|(name, a)| {
            let balance = spacetime::divergence_theorem_residual(&scenario.domain, t0, t, a, rule)?;
            Ok(DivergenceRow {
                scenario: scenario.name.clone(),
                field: name.clone(),
                t0,
                t,
                passed: balance.residual < DIVERGENCE_TOL,
                balance,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReparametrizationRow {
    pub scenario: String,
    pub t: f64,
    pub samples: usize,
    pub gap: f64,
    pub passed: bool,
}

pub const REPARAMETRIZATION_TOL: f64 = 1e-6;

/// `V∂` gap between the primary and alternate boundary immersions at `times`.
pub fn reparametrization_rows(
    scenario: &Scenario,
    times: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Vec<ReparametrizationRow>> {
    let alt = scenario.alternate_boundary.as_ref().ok_or_else(|| {
        TransportError::InvalidInput(format!("scenario {} has no alternate boundary", scenario.name))
    })?;
    times
        .iter()
        .map(|&t| {
            let gap = geometry::reparametrization_gap(&scenario.domain, alt, t, samples, seed)?;
            Ok(ReparametrizationRow {
                scenario: scenario.name.clone(),
                t,
                samples,
                gap,
                passed: gap < REPARAMETRIZATION_TOL,
            })
        })
        .collect()
}
