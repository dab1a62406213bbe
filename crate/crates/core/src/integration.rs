//! Area-formula quadrature over immersed boundaries and over the evolving set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::domain::{BoundaryImmersion, EvolvingDomain, ScalarField};
use crate::error::{Result, TransportError};
use crate::geometry::{self, BoundaryGeometry};
use crate::linalg;
use crate::quadrature::{self, IntegralEstimate, QuadratureRule, RuleKind};

const MC_CHUNK: usize = 1 << 15;

/// `∫_N φ(t, f_t(z)) J_{f_t}(z) dz` over every chart of the immersion.
pub fn integrate_immersed(
    immersion: &BoundaryImmersion,
    t: f64,
    field: &ScalarField,
    rule: &QuadratureRule,
    rank_tol: f64,
) -> Result<IntegralEstimate> {
    quadrature::gauss_estimate(rule, |order| {
        let mut total = 0.0;
        for (c, chart) in immersion.charts.iter().enumerate() {
            total += quadrature::tensor_sum(chart, order, |z| {
                let p = immersion.point(t, c, z)?;
                let j = linalg::jacobian_of(&immersion.differential(t, c, z)?, rank_tol)?;
                Ok(field.value(t, &p)? * j)
            })?;
        }
        Ok(total)
    })
}

/// `∫_{O_t} φ dH^m`.
///
/// Gauss rules integrate through the bulk parametrization; Monte Carlo rules
/// sample the manifold chart and weight by the membership indicator.
pub fn integrate_domain(
    domain: &EvolvingDomain,
    t: f64,
    field: &ScalarField,
    rule: &QuadratureRule,
) -> Result<IntegralEstimate> {
    integrate_over_domain(domain, t, rule, |x| field.value(t, x))
}

/// `∫_{O_t} g dH^m` for an arbitrary pointwise integrand `g(x)`.
pub fn integrate_over_domain<G>(
    domain: &EvolvingDomain,
    t: f64,
    rule: &QuadratureRule,
    g: G,
) -> Result<IntegralEstimate>
where
    G: Fn(&nalgebra::DVector<f64>) -> Result<f64> + Sync,
{
    match rule.kind {
        RuleKind::GaussTensor => {
            let pieces = domain.bulk.as_ref().ok_or(TransportError::NoIntegrationPath)?;
            quadrature::gauss_estimate(rule, |order| {
                let mut total = 0.0;
                for piece in pieces {
                    total += quadrature::tensor_sum(&piece.param_box, order, |u| {
                        let x = piece.point(t, u)?;
                        let j = linalg::volume_factor(&piece.differential(t, u)?)?;
                        Ok(g(&x)? * j)
                    })?;
                }
                Ok(total)
            })
        }
        RuleKind::MonteCarlo => monte_carlo(domain, t, rule, g),
    }
}

fn monte_carlo<G>(
    domain: &EvolvingDomain,
    t: f64,
    rule: &QuadratureRule,
    g: G,
) -> Result<IntegralEstimate>
where
    G: Fn(&nalgebra::DVector<f64>) -> Result<f64> + Sync,
{
    if !domain.has_membership() {
        return Err(TransportError::NoIntegrationPath);
    }
    let n = rule.order_or_count;
    if n < 2 {
        return Err(TransportError::InvalidInput(
            "monte carlo needs at least two samples".into(),
        ));
    }
    let chart = &domain.manifold;
    let bounds = &chart.param_domain;
    let chunks = n.div_ceil(MC_CHUNK);
    // each chunk owns an independent stream so the result does not depend on scheduling
    let partials: Vec<Result<(f64, f64)>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(rule.seed);
            rng.set_stream(k as u64);
            let count = MC_CHUNK.min(n - k * MC_CHUNK);
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                let unit: Vec<f64> = (0..bounds.dim()).map(|_| rng.gen::<f64>()).collect();
                let u = bounds.from_unit(&unit);
                let x = chart.embed(&u)?;
                if domain.is_inside(t, &x)? {
                    let j = if chart.is_flat() {
                        1.0
                    } else {
                        linalg::volume_factor(&chart.jacobian(&u)?)?
                    };
                    let v = g(&x)? * j;
                    s1 += v;
                    s2 += v * v;
                }
            }
            Ok((s1, s2))
        })
        .collect();
    let (mut s1, mut s2) = (0.0, 0.0);
    for p in partials {
        let (a, b) = p?;
        s1 += a;
        s2 += b;
    }
    let nf = n as f64;
    let mean = s1 / nf;
    let var = (s2 / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
    let vol = bounds.volume();
    Ok(IntegralEstimate {
        value: mean * vol,
        error_indicator: vol * (var / nf).sqrt(),
    })
}

/// `∫_{∂*O_t} g dH^{m-1}` where the integrand sees the full boundary geometry
/// (point, normal, velocity, `V∂`) at each node.
pub fn integrate_boundary<G>(
    domain: &EvolvingDomain,
    t: f64,
    integrand: G,
    rule: &QuadratureRule,
) -> Result<IntegralEstimate>
where
    G: Fn(&BoundaryGeometry) -> Result<f64> + Sync,
{
    quadrature::gauss_estimate(rule, |order| boundary_sum(domain, t, &integrand, order))
}

pub(crate) fn boundary_sum<G>(domain: &EvolvingDomain, t: f64, integrand: &G, order: usize) -> Result<f64>
where
    G: Fn(&BoundaryGeometry) -> Result<f64> + Sync,
{
    let mut total = 0.0;
    for (c, chart) in domain.boundary.charts.iter().enumerate() {
        total += quadrature::tensor_sum(chart, order, |z| {
            let geom = geometry::boundary_geometry(domain, t, c, z)?;
            Ok(integrand(&geom)? * geom.jacobian)
        })?;
    }
    Ok(total)
}
