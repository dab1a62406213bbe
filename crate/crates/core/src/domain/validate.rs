//! Sampled checks of the contracts a scene author promises: boundary on `M`,
//! full-rank differentials, time regularity, and bulk/boundary/membership
//! consistency.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{EvolvingDomain, ParamBox, ScalarField};
use crate::error::{Result, TransportError};
use crate::geometry;
use crate::linalg;

/// Boundary samples closer than this (in parameter distance, relative to the
/// chart diameter) to a declared exceptional preimage skip the rank check.
const EXCEPTIONAL_SKIP: f64 = 1e-3;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub max_violation: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub skipped: usize,
    /// Diagnostics are reported but never fail the scene.
    pub diagnostic: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub t: f64,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || c.diagnostic)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

struct Accumulator {
    name: &'static str,
    tolerance: f64,
    worst: f64,
    samples: usize,
    skipped: usize,
    failed: bool,
}

impl Accumulator {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Accumulator {
            name,
            tolerance,
            worst: 0.0,
            samples: 0,
            skipped: 0,
            failed: false,
        }
    }

    /// Records a violation measure that must not exceed the tolerance.
    fn observe(&mut self, violation: f64) {
        self.samples += 1;
        self.worst = self.worst.max(violation);
        if violation > self.tolerance {
            self.failed = true;
        }
    }

    /// Records a value that must stay strictly above the tolerance.
    fn observe_floor(&mut self, value: f64) {
        self.samples += 1;
        if self.samples == 1 {
            self.worst = value;
        } else {
            self.worst = self.worst.min(value);
        }
        if value <= self.tolerance {
            self.failed = true;
        }
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            name: self.name.to_string(),
            passed: !self.failed,
            max_violation: self.worst,
            tolerance: self.tolerance,
            samples: self.samples,
            skipped: self.skipped,
            diagnostic: false,
        }
    }
}

fn random_in(rng: &mut ChaCha8Rng, b: &ParamBox) -> Vec<f64> {
    let s: Vec<f64> = (0..b.dim()).map(|_| rng.gen::<f64>()).collect();
    b.from_unit(&s)
}

/// Runs every sampled scene invariant at time `t`.
///
/// User maps that return non-finite values abort with `EvaluationFailure`;
/// everything else is reported per check.
pub fn validate_scene(
    domain: &EvolvingDomain,
    t: f64,
    samples: usize,
    seed: u64,
) -> Result<ValidationReport> {
    if samples == 0 {
        return Err(TransportError::InvalidInput("samples must be at least 1".into()));
    }
    let tol = domain.tolerances;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chart = &domain.manifold;
    let boundary = &domain.boundary;
    let mut checks = Vec::new();

    // chart: full rank and injective (round trip through the inverse)
    let mut chart_rank = Accumulator::new("chart_rank", tol.rank_tol);
    let mut chart_injective = Accumulator::new("chart_injective", 1e-8);
    for _ in 0..samples {
        let u = random_in(&mut rng, &chart.param_domain);
        let j = chart.jacobian(&u)?;
        let smallest = j.singular_values().iter().cloned().fold(f64::INFINITY, f64::min);
        chart_rank.observe_floor(smallest);
        let back = chart.closest_param(&chart.embed(&u)?)?;
        chart_injective.observe(chart.param_domain.distance(&u, &back));
    }
    checks.push(chart_rank.finish());
    checks.push(chart_injective.finish());

    let time_scale = boundary.delta_time * 1e6;
    let exceptional = domain.exceptional_points(t);
    let mut on_manifold = Accumulator::new("boundary_on_manifold", tol.surface_tol);
    let mut boundary_rank = Accumulator::new("boundary_rank", tol.rank_tol);
    let mut c1 = Accumulator::new("boundary_c1_in_time", 1e-4);
    let mut velocity = Accumulator::new("boundary_velocity_consistency", 1e-6);
    let mut probes = Accumulator::new("normal_probe_orientation", 0.0);
    let mut unit = Accumulator::new("normal_unit_length", tol.unit_tol);
    let mut orth = Accumulator::new("normal_orthogonality", tol.proj_tol);
    for i in 0..samples {
        let c = i % boundary.charts.len();
        let z = random_in(&mut rng, &boundary.charts[c]);
        let p = boundary.point(t, c, &z)?;
        on_manifold.observe((&p - chart.project(&p)?).norm());

        let near_exceptional = exceptional.iter().any(|q| {
            let scale = boundary.charts[c].diameter().max(1.0);
            (q - &p).norm() < EXCEPTIONAL_SKIP * scale
        });
        if near_exceptional {
            boundary_rank.skipped += 1;
            probes.skipped += 1;
        } else {
            let df = boundary.differential(t, c, &z)?;
            boundary_rank.observe_floor(linalg::gram_determinant(&df));
            match geometry::boundary_geometry(domain, t, c, &z) {
                Ok(g) => {
                    probes.observe(0.0);
                    unit.observe((g.normal.norm() - 1.0).abs());
                    let worst = g
                        .tangents
                        .column_iter()
                        .map(|tau| (g.normal.dot(&tau) / tau.norm()).abs())
                        .fold(0.0, f64::max);
                    let frame =
                        geometry::TangentFrame::new(p.clone(), chart.tangent_basis(&p)?, tol.rank_tol)?;
                    let normal_part = (&g.normal - frame.projector() * &g.normal).norm();
                    orth.observe(worst.max(normal_part));
                }
                Err(TransportError::OrientationAmbiguous { .. })
                | Err(TransportError::RankDeficient { .. }) => probes.observe(1.0),
                Err(e) => return Err(e),
            }
        }

        let h = 1e-3 * time_scale;
        let d1 = boundary.fd_velocity(t, c, &z, h);
        let d2 = boundary.fd_velocity(t, c, &z, 0.5 * h);
        linalg::ensure_finite_vec("boundary time difference", &d1)?;
        c1.observe((&d1 - &d2).norm() / (1.0 + d2.norm()));
        if boundary.has_analytic_velocity() {
            let v = boundary.velocity(t, c, &z)?;
            velocity.observe((&v - &d2).norm() / (1.0 + v.norm()));
        }
    }
    checks.extend([on_manifold, boundary_rank, c1].map(Accumulator::finish));
    if boundary.has_analytic_velocity() {
        checks.push(velocity.finish());
    }
    if domain.has_membership() {
        checks.extend([probes, unit, orth].map(Accumulator::finish));
    }

    if let (Some(pieces), true) = (domain.bulk.as_ref(), domain.has_membership()) {
        let mut bulk = Accumulator::new("bulk_membership", 0.0);
        for i in 0..samples {
            let piece = &pieces[i % pieces.len()];
            let u = random_in(&mut rng, &piece.param_box);
            let x = piece.point(t, &u)?;
            bulk.observe(if domain.is_inside(t, &x)? { 0.0 } else { 1.0 });
        }
        checks.push(bulk.finish());
    }

    if boundary.param_dim() == 1 && domain.ambient_dim() == 2 {
        let found = detect_self_intersections(domain, t, 4 * samples.max(64))?;
        checks.push(CheckResult {
            name: "self_intersections_detected".into(),
            passed: found == domain.exceptional_set_size(t),
            max_violation: found as f64,
            tolerance: domain.exceptional_set_size(t) as f64,
            samples: 4 * samples.max(64),
            skipped: 0,
            diagnostic: true,
        });
    }

    Ok(ValidationReport { t, checks })
}

/// Counts self-intersections of a polyline sampling of a planar boundary
/// curve: transversal crossings between segments, plus chart junctions where
/// more than two chart ends meet. Diagnostic only: tangential contacts and
/// crossings finer than the sampling are missed.
pub fn detect_self_intersections(domain: &EvolvingDomain, t: f64, samples: usize) -> Result<usize> {
    let boundary = &domain.boundary;
    if boundary.param_dim() != 1 || domain.ambient_dim() != 2 {
        return Err(TransportError::InvalidInput(
            "self-intersection detection is implemented for planar curves".into(),
        ));
    }
    let per_chart = (samples / boundary.charts.len()).max(8);
    let mut segments: Vec<(DVector<f64>, DVector<f64>)> = Vec::new();
    let mut chart_ends: Vec<DVector<f64>> = Vec::new();
    for (c, chart) in boundary.charts.iter().enumerate() {
        let pts: Vec<DVector<f64>> = (0..=per_chart)
            .map(|k| boundary.point(t, c, &chart.from_unit(&[k as f64 / per_chart as f64])))
            .collect::<Result<_>>()?;
        chart_ends.push(pts[0].clone());
        chart_ends.push(pts[per_chart].clone());
        for w in pts.windows(2) {
            segments.push((w[0].clone(), w[1].clone()));
        }
    }
    let close = 1e-12 * (1.0 + domain.manifold.param_domain.diameter());
    let shares_endpoint = |a: &(DVector<f64>, DVector<f64>), b: &(DVector<f64>, DVector<f64>)| {
        [(&a.0, &b.0), (&a.0, &b.1), (&a.1, &b.0), (&a.1, &b.1)]
            .iter()
            .any(|(p, q)| (*p - *q).norm() < close)
    };
    let mut count = 0;
    for i in 0..segments.len() {
        for j in i + 1..segments.len() {
            if shares_endpoint(&segments[i], &segments[j]) {
                continue;
            }
            if segments_cross(&segments[i], &segments[j]) {
                count += 1;
            }
        }
    }
    // a junction where 2k chart ends meet is k - 1 crossings
    let mut seen = vec![false; chart_ends.len()];
    for i in 0..chart_ends.len() {
        if seen[i] {
            continue;
        }
        let mut ends = 0usize;
        for j in i..chart_ends.len() {
            if !seen[j] && (&chart_ends[i] - &chart_ends[j]).norm() < close {
                seen[j] = true;
                ends += 1;
            }
        }
        count += (ends / 2).saturating_sub(1);
    }
    Ok(count)
}

fn segments_cross(a: &(DVector<f64>, DVector<f64>), b: &(DVector<f64>, DVector<f64>)) -> bool {
    let cross = |o: &DVector<f64>, p: &DVector<f64>, q: &DVector<f64>| {
        (p[0] - o[0]) * (q[1] - o[1]) - (p[1] - o[1]) * (q[0] - o[0])
    };
    let d1 = cross(&a.0, &a.1, &b.0);
    let d2 = cross(&a.0, &a.1, &b.1);
    let d3 = cross(&b.0, &b.1, &a.0);
    let d4 = cross(&b.0, &b.1, &a.1);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Checks a supplied `φ'` against a central difference of `φ` (second order).
pub fn validate_field(
    field: &ScalarField,
    domain: &EvolvingDomain,
    t: f64,
    samples: usize,
    seed: u64,
) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = Accumulator::new("field_time_partial", 1e-6);
    if !field.has_time_partial() {
        return Ok(CheckResult {
            skipped: samples,
            ..acc.finish()
        });
    }
    let h = 1e-4 * domain.boundary.delta_time * 1e6;
    for _ in 0..samples {
        let u = random_in(&mut rng, &domain.manifold.param_domain);
        let x = domain.manifold.embed(&u)?;
        let exact = field.time_partial(t, &x)?;
        let fd = field.fd_time_partial(t, &x, h);
        acc.observe((exact - fd).abs() / (1.0 + exact.abs()));
    }
    Ok(acc.finish())
}
