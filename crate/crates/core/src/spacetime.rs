//! The space-time set `W = {(s, x) : s ∈ (t₀, t), x ∈ O_s}` inside `E = R × M`.
//!
//! Space-time vectors are stored in `(time, space)` block order throughout:
//! index 0 is the time slot and `t̂ = (1, 0, …, 0)`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::domain::{EvolvingDomain, ParamBox, ScalarField};
use crate::error::{Result, TransportError};
use crate::geometry::{self, BoundaryGeometry};
use crate::integration;
use crate::linalg;
use crate::quadrature::{self, gauss_legendre, IntegralEstimate, QuadratureRule};

/// Part of the reduced boundary of `W`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryPart {
    Bottom,
    Lateral,
    Top,
}

/// A point of `∂*W` with its exterior unit normal.
#[derive(Debug, Clone)]
pub struct SpaceTimeFrame {
    pub part: BoundaryPart,
    pub point: DVector<f64>,
    pub normal: DVector<f64>,
}

impl SpaceTimeFrame {
    /// Frame on the bottom (`s = t₀`) or top (`s = t`) slice; the normal is `∓t̂`.
    pub fn cap(part: BoundaryPart, s: f64, x: &DVector<f64>) -> Self {
        let point = prepend_time(s, x);
        let mut normal = DVector::zeros(point.len());
        normal[0] = match part {
            BoundaryPart::Bottom => -1.0,
            BoundaryPart::Top => 1.0,
            BoundaryPart::Lateral => panic!("lateral frames are built from boundary geometry"),
        };
        SpaceTimeFrame { part, point, normal }
    }

    pub fn lateral(geom: &BoundaryGeometry) -> Self {
        SpaceTimeFrame {
            part: BoundaryPart::Lateral,
            point: prepend_time(geom.t, &geom.point),
            normal: lateral_normal_from(geom),
        }
    }
}

fn prepend_time(s: f64, x: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(x.len() + 1);
    out[0] = s;
    out.rows_mut(1, x.len()).copy_from(x);
    out
}

fn time_axis_box(t0: f64, t: f64, chart: &ParamBox) -> Result<ParamBox> {
    if !(t0 < t) {
        return Err(TransportError::InvalidInput(format!(
            "time interval ({t0}, {t}) is empty"
        )));
    }
    let mut lower = vec![t0];
    let mut upper = vec![t];
    lower.extend_from_slice(&chart.lower);
    upper.extend_from_slice(&chart.upper);
    let mut b = ParamBox::new(lower, upper);
    for (i, p) in chart.periodic.iter().enumerate() {
        b.periodic[i + 1] = *p;
    }
    Ok(b)
}

/// `F(s, z) = (s, f(s, z))`.
pub fn spacetime_immersion(
    domain: &EvolvingDomain,
    s: f64,
    chart: usize,
    z: &[f64],
) -> Result<DVector<f64>> {
    Ok(prepend_time(s, &domain.boundary.point(s, chart, z)?))
}

/// Exterior unit normal of `W` on the lateral side, `(-V∂, n) / √(1 + V∂²)`.
pub fn lateral_normal(domain: &EvolvingDomain, s: f64, chart: usize, z: &[f64]) -> Result<DVector<f64>> {
    Ok(lateral_normal_from(&geometry::boundary_geometry(domain, s, chart, z)?))
}

pub fn lateral_normal_from(geom: &BoundaryGeometry) -> DVector<f64> {
    let v = geom.normal_velocity;
    let scale = 1.0 / (1.0 + v * v).sqrt();
    let mut w = prepend_time(-v, &geom.normal);
    w *= scale;
    w
}

/// Residuals of the properties that characterize the lateral normal `w`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LateralNormalCheck {
    /// `||w| - 1|`
    pub unit_defect: f64,
    /// `|w · (V∂ n + t̂)|`
    pub tangency_residual: f64,
    /// `w · n`, must be positive
    pub normal_alignment: f64,
    /// `max_τ |(w - (w·t̂) t̂) · τ|` over unit boundary tangents `τ`
    pub frame_residual: f64,
}

pub fn check_lateral_normal(geom: &BoundaryGeometry) -> LateralNormalCheck {
    let w = lateral_normal_from(geom);
    let d = geom.point.len();
    let v = geom.normal_velocity;
    let mut probe = prepend_time(1.0, &(&geom.normal * v));
    let tangency_residual = w.dot(&probe).abs();
    probe = prepend_time(0.0, &geom.normal);
    let normal_alignment = w.dot(&probe);
    let spatial = w.rows(1, d).into_owned();
    let frame_residual = geom
        .tangents
        .column_iter()
        .map(|tau| spatial.dot(&(tau / tau.norm())).abs())
        .fold(0.0, f64::max);
    LateralNormalCheck {
        unit_defect: (w.norm() - 1.0).abs(),
        tangency_residual,
        normal_alignment,
        frame_residual,
    }
}

/// `(1+d) × m` differential of `F` with the time column first.
pub fn spacetime_differential(geom: &BoundaryGeometry) -> DMatrix<f64> {
    let d = geom.point.len();
    let k = geom.tangents.ncols();
    let mut df = DMatrix::zeros(d + 1, k + 1);
    df[(0, 0)] = 1.0;
    df.view_mut((1, 0), (d, 1)).copy_from(&geom.velocity);
    df.view_mut((1, 1), (d, k)).copy_from(&geom.tangents);
    df
}

/// Both routes to the lateral Jacobian: `√det(dFᵀdF)` and `√(1+V∂²) J_{f_s}`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpaceTimeJacobian {
    pub direct: f64,
    pub factored: f64,
}

impl SpaceTimeJacobian {
    pub fn relative_gap(&self) -> f64 {
        (self.direct - self.factored).abs() / self.direct
    }
}

pub fn spacetime_jacobian(
    domain: &EvolvingDomain,
    s: f64,
    chart: usize,
    z: &[f64],
) -> Result<SpaceTimeJacobian> {
    let geom = geometry::boundary_geometry(domain, s, chart, z)?;
    jacobians_from(&geom, domain.tolerances.rank_tol)
}

pub fn jacobians_from(geom: &BoundaryGeometry, rank_tol: f64) -> Result<SpaceTimeJacobian> {
    let direct = linalg::jacobian_of(&spacetime_differential(geom), rank_tol)?;
    let v = geom.normal_velocity;
    Ok(SpaceTimeJacobian {
        direct,
        factored: (1.0 + v * v).sqrt() * geom.jacobian,
    })
}

/// `∫_S φ dH^m` through the area formula for `F` on `(t₀, t) × N`.
pub fn lateral_integral_direct(
    domain: &EvolvingDomain,
    t0: f64,
    t: f64,
    field: &ScalarField,
    rule: &QuadratureRule,
) -> Result<IntegralEstimate> {
    let rank_tol = domain.tolerances.rank_tol;
    quadrature::gauss_estimate(rule, |order| {
        let mut total = 0.0;
        for (c, chart) in domain.boundary.charts.iter().enumerate() {
            let b = time_axis_box(t0, t, chart)?;
            total += quadrature::tensor_sum(&b, order, |sz| {
                let (s, z) = (sz[0], &sz[1..]);
                let p = domain.boundary.point(s, c, z)?;
                let mut df = DMatrix::zeros(p.len() + 1, z.len() + 1);
                df[(0, 0)] = 1.0;
                df.view_mut((1, 0), (p.len(), 1))
                    .copy_from(&domain.boundary.velocity(s, c, z)?);
                df.view_mut((1, 1), (p.len(), z.len()))
                    .copy_from(&domain.boundary.differential(s, c, z)?);
                Ok(field.value(s, &p)? * linalg::jacobian_of(&df, rank_tol)?)
            })?;
        }
        Ok(total)
    })
}

/// `∫_{t₀}^{t} ∫_{∂*O_s} φ √(1+V∂²) dH^{m-1} ds`.
pub fn lateral_integral_iterated(
    domain: &EvolvingDomain,
    t0: f64,
    t: f64,
    field: &ScalarField,
    rule: &QuadratureRule,
) -> Result<IntegralEstimate> {
    if !(t0 < t) {
        return Err(TransportError::InvalidInput(format!(
            "time interval ({t0}, {t}) is empty"
        )));
    }
    quadrature::gauss_estimate(rule, |order| {
        let (x, w) = gauss_legendre(order);
        let half = 0.5 * (t - t0);
        let mut total = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            let s = t0 + half * (xi + 1.0);
            let inner = integration::boundary_sum(
                domain,
                s,
                &|g: &BoundaryGeometry| {
                    let v = g.normal_velocity;
                    Ok(field.value(s, &g.point)? * (1.0 + v * v).sqrt())
                },
                order,
            )?;
            total += half * wi * inner;
        }
        Ok(total)
    })
}

pub type SpaceTimeVecFn = Arc<dyn Fn(f64, &DVector<f64>) -> DVector<f64> + Send + Sync>;
pub type SpaceTimeMatFn = Arc<dyn Fn(f64, &DVector<f64>) -> DMatrix<f64> + Send + Sync>;

/// Vector field `a(s, x) ∈ R^{1+d}` on `E`, tangent to `E`, with its ambient
/// Jacobian with respect to `(s, x)`.
#[derive(Clone)]
pub struct SpaceTimeField {
    value: SpaceTimeVecFn,
    jacobian: SpaceTimeMatFn,
}

impl std::fmt::Debug for SpaceTimeField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("SpaceTimeField")
    }
}

impl SpaceTimeField {
    pub fn new(value: SpaceTimeVecFn, jacobian: SpaceTimeMatFn) -> Self {
        SpaceTimeField { value, jacobian }
    }

    /// Constant field `(c₀, c₁, …, c_d)`; only tangent to `E` when `M` is flat.
    pub fn constant(c: Vec<f64>) -> Self {
        let n = c.len();
        let v = DVector::from_vec(c);
        SpaceTimeField::new(
            Arc::new(move |_, _| v.clone()),
            Arc::new(move |_, _| DMatrix::zeros(n, n)),
        )
    }

    /// `φ t̂`; needs a field with analytic time partial and gradient.
    pub fn time_like(phi: ScalarField) -> Result<Self> {
        if !phi.has_time_partial() || !phi.has_gradient() {
            return Err(TransportError::InvalidInput(
                "φ t̂ needs an analytic time partial and gradient".into(),
            ));
        }
        let p = phi.clone();
        Ok(SpaceTimeField::new(
            Arc::new(move |s, x| {
                let mut v = DVector::zeros(x.len() + 1);
                v[0] = p.value(s, x).unwrap_or(f64::NAN);
                v
            }),
            Arc::new(move |s, x| {
                let d = x.len();
                let mut j = DMatrix::zeros(d + 1, d + 1);
                j[(0, 0)] = phi.time_partial(s, x).unwrap_or(f64::NAN);
                if let Some(Ok(g)) = phi.gradient(s, x) {
                    j.view_mut((0, 1), (1, d)).copy_from(&g.transpose());
                } else {
                    j.fill(f64::NAN);
                }
                j
            }),
        ))
    }

    /// Purely spatial affine field `(0, A x + b)`.
    pub fn spatial_affine(a: DMatrix<f64>, b: DVector<f64>) -> Self {
        let (a2, b2) = (a.clone(), b.clone());
        SpaceTimeField::new(
            Arc::new(move |_, x| prepend_time(0.0, &(&a2 * x + &b2))),
            Arc::new(move |_, x| {
                let d = x.len();
                let mut j = DMatrix::zeros(d + 1, d + 1);
                j.view_mut((1, 1), (d, d)).copy_from(&a);
                j
            }),
        )
    }

    pub fn value(&self, s: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        let v = (self.value)(s, x);
        linalg::ensure_finite_vec("space-time field", &v)?;
        Ok(v)
    }

    pub fn jacobian(&self, s: f64, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let j = (self.jacobian)(s, x);
        linalg::ensure_finite_mat("space-time field jacobian", &j)?;
        Ok(j)
    }

    /// The same field with time relabelled `s ↦ s + shift`.
    pub fn time_shifted(&self, shift: f64) -> Self {
        let (v, j) = (self.value.clone(), self.jacobian.clone());
        SpaceTimeField::new(
            Arc::new(move |s, x| v(s - shift, x)),
            Arc::new(move |s, x| j(s - shift, x)),
        )
    }
}

/// Both sides of the divergence theorem on `W`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivergenceBalance {
    /// `∫_W div_E a dH^{m+1}`
    pub volume: f64,
    /// `-∫_{O_{t₀}} a·t̂`
    pub bottom: f64,
    pub lateral: f64,
    /// `∫_{O_t} a·t̂`
    pub top: f64,
    pub residual: f64,
}

/// `|∫_W div_E a − ∫_{∂*W} a·w|`, with `div_E a = tr((TᵀT)⁻¹ Tᵀ Da T)` computed
/// through the space-time bulk frame `T = d(s, B(s, u))`.
pub fn divergence_theorem_residual(
    domain: &EvolvingDomain,
    t0: f64,
    t: f64,
    afield: &SpaceTimeField,
    rule: &QuadratureRule,
) -> Result<DivergenceBalance> {
    let order = rule.gauss_order()?;
    let pieces = domain.bulk.as_ref().ok_or(TransportError::NoIntegrationPath)?;
    let rank_tol = domain.tolerances.rank_tol;

    let mut volume = 0.0;
    for piece in pieces {
        let b = time_axis_box(t0, t, &piece.param_box)?;
        volume += quadrature::tensor_sum(&b, order, |su| {
            let (s, u) = (su[0], &su[1..]);
            let x = piece.point(s, u)?;
            let d = x.len();
            let m = u.len();
            let mut frame = DMatrix::zeros(d + 1, m + 1);
            frame[(0, 0)] = 1.0;
            frame.view_mut((1, 0), (d, 1)).copy_from(&piece.velocity(s, u)?);
            frame.view_mut((1, 1), (d, m)).copy_from(&piece.differential(s, u)?);
            let jac = linalg::volume_factor(&frame)?;
            let metric = linalg::gram(&frame);
            let da = afield.jacobian(s, &x)?;
            let pulled = frame.transpose() * da * &frame;
            let Some(coords) = metric.lu().solve(&pulled) else {
                return Err(TransportError::RankDeficient { gram_det: 0.0, tol: rank_tol });
            };
            Ok(coords.trace() * jac)
        })?;
    }

    let cap = |s: f64| -> Result<f64> {
        Ok(integration::integrate_over_domain(domain, s, &QuadratureRule::gauss(order), |x| {
            Ok(afield.value(s, x)?[0])
        })?
        .value)
    };
    let bottom = -cap(t0)?;
    let top = cap(t)?;

    let mut lateral = 0.0;
    for (c, chart) in domain.boundary.charts.iter().enumerate() {
        let b = time_axis_box(t0, t, chart)?;
        lateral += quadrature::tensor_sum(&b, order, |sz| {
            let (s, z) = (sz[0], &sz[1..]);
            let geom = geometry::boundary_geometry(domain, s, c, z)?;
            let jf = jacobians_from(&geom, rank_tol)?.direct;
            let w = lateral_normal_from(&geom);
            Ok(afield.value(s, &geom.point)?.dot(&w) * jf)
        })?;
    }

    let surface = bottom + lateral + top;
    Ok(DivergenceBalance {
        volume,
        bottom,
        lateral,
        top,
        residual: (volume - surface).abs(),
    })
}
