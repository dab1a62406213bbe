//! Pointwise geometry of an evolving domain: immersion Jacobians, tangent
//! projections, boundary velocity, exterior unit normal relative to `M`, and
//! the scalar normal velocity `V∂ = v·n`.
//!
//! Velocities are always taken in parameter coordinates (`∂f/∂t` at fixed
//! `z`). Nothing here inverts `f_t`, so the same code runs unchanged through
//! self-intersections of the boundary image.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{BoundaryImmersion, EvolvingDomain};
use crate::error::{Result, TransportError};
use crate::linalg;

/// Tangent frame at a point: columns span the range of an immersion differential.
#[derive(Debug, Clone)]
pub struct TangentFrame {
    pub base_point: DVector<f64>,
    pub basis: DMatrix<f64>,
    projector: DMatrix<f64>,
}

impl TangentFrame {
    pub fn new(base_point: DVector<f64>, basis: DMatrix<f64>, rank_tol: f64) -> Result<Self> {
        let d = base_point.len();
        assert_eq!(basis.nrows(), d, "frame vectors must live in the ambient space");
        let projector = if basis.ncols() == 0 {
            DMatrix::zeros(d, d)
        } else {
            // P = Q Qᵀ with Q orthonormal keeps P symmetric and idempotent to rounding
            linalg::jacobian_of(&basis, rank_tol)?;
            let q = linalg::orthonormal_columns(&basis, rank_tol)?;
            &q * q.transpose()
        };
        Ok(TangentFrame {
            base_point,
            basis,
            projector,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn projector(&self) -> &DMatrix<f64> {
        &self.projector
    }
}

/// `√det(dFᵀdF)` of an immersion differential.
pub fn immersion_jacobian(differential: &DMatrix<f64>, rank_tol: f64) -> Result<f64> {
    linalg::jacobian_of(differential, rank_tol)
}

/// Orthogonal projection of `w` onto the span of the frame.
pub fn tangent_projection(frame: &TangentFrame, w: &DVector<f64>) -> DVector<f64> {
    frame.projector() * w
}

/// Boundary velocity `f'(t, z)`, which equals `v(t, f_t(z))`.
pub fn boundary_velocity(
    domain: &EvolvingDomain,
    t: f64,
    chart: usize,
    z: &[f64],
) -> Result<DVector<f64>> {
    domain.boundary.velocity(t, chart, z)
}

/// Exterior unit normal to `O_t` relative to `M` at `f(t, z)`.
pub fn exterior_unit_normal(
    domain: &EvolvingDomain,
    t: f64,
    chart: usize,
    z: &[f64],
) -> Result<DVector<f64>> {
    let p = domain.boundary.point(t, chart, z)?;
    let tangents = domain.boundary.differential(t, chart, z)?;
    normal_from_frames(domain, t, &p, &tangents)
}

/// `V∂ = f'·n`.
pub fn normal_velocity(domain: &EvolvingDomain, t: f64, chart: usize, z: &[f64]) -> Result<f64> {
    Ok(boundary_geometry(domain, t, chart, z)?.normal_velocity)
}

/// Every pointwise quantity the integrators need at one boundary node.
#[derive(Debug, Clone)]
pub struct BoundaryGeometry {
    pub t: f64,
    pub chart: usize,
    pub z: Vec<f64>,
    pub point: DVector<f64>,
    pub velocity: DVector<f64>,
    pub normal: DVector<f64>,
    pub normal_velocity: f64,
    /// `d × (m-1)` spatial differential of the immersion.
    pub tangents: DMatrix<f64>,
    /// Area-formula Jacobian `J_{f_t}(z)`.
    pub jacobian: f64,
}

pub fn boundary_geometry(
    domain: &EvolvingDomain,
    t: f64,
    chart: usize,
    z: &[f64],
) -> Result<BoundaryGeometry> {
    geometry_with(domain, &domain.boundary, t, chart, z)
}

/// Boundary geometry for an alternative immersion of the same boundary, using
/// the manifold and membership predicate of `domain`.
pub fn geometry_with(
    domain: &EvolvingDomain,
    immersion: &BoundaryImmersion,
    t: f64,
    chart: usize,
    z: &[f64],
) -> Result<BoundaryGeometry> {
    let point = immersion.point(t, chart, z)?;
    let tangents = immersion.differential(t, chart, z)?;
    let jacobian = immersion_jacobian(&tangents, domain.tolerances.rank_tol)?;
    let normal = normal_from_frames(domain, t, &point, &tangents)?;
    let velocity = immersion.velocity(t, chart, z)?;
    let normal_velocity = linalg::ensure_finite("normal velocity", velocity.dot(&normal))?;
    Ok(BoundaryGeometry {
        t,
        chart,
        z: z.to_vec(),
        point,
        velocity,
        normal,
        normal_velocity,
        tangents,
        jacobian,
    })
}

fn normal_from_frames(
    domain: &EvolvingDomain,
    t: f64,
    p: &DVector<f64>,
    tangents: &DMatrix<f64>,
) -> Result<DVector<f64>> {
    let tol = &domain.tolerances;
    let manifold_basis = domain.manifold.tangent_basis(p)?;
    linalg::jacobian_of(&manifold_basis, tol.rank_tol)?;
    if tangents.ncols() > 0 {
        linalg::jacobian_of(tangents, tol.rank_tol)?;
    }
    let q = linalg::orthonormal_columns(&manifold_basis, tol.rank_tol)?;
    let coords = q.transpose() * tangents;
    let c = linalg::hyperplane_normal(&coords, tol.rank_tol)?;
    let n = &q * c;
    orient(domain, t, p, n)
}

fn orient(domain: &EvolvingDomain, t: f64, p: &DVector<f64>, n: DVector<f64>) -> Result<DVector<f64>> {
    let eps = domain.tolerances.probe_eps;
    let ahead = domain.manifold.project(&(p + &n * eps))?;
    let behind = domain.manifold.project(&(p - &n * eps))?;
    match (domain.is_inside(t, &ahead)?, domain.is_inside(t, &behind)?) {
        (false, true) => Ok(n),
        (true, false) => Ok(-n),
        (true, true) => Err(TransportError::OrientationAmbiguous {
            point: p.as_slice().to_vec(),
            state: "inside",
        }),
        (false, false) => Err(TransportError::OrientationAmbiguous {
            point: p.as_slice().to_vec(),
            state: "outside",
        }),
    }
}

/// Chart and parameter of the point of `immersion(t, ·)` nearest to `target`.
///
/// A coarse scan of every chart seeds a Gauss-Newton refinement; the result is
/// rejected with `MatchFailure` when the final distance exceeds `match_tol`.
pub fn nearest_boundary_param(
    immersion: &BoundaryImmersion,
    t: f64,
    target: &DVector<f64>,
    match_tol: f64,
) -> Result<(usize, Vec<f64>)> {
    let k = immersion.param_dim();
    let per_axis: usize = match k {
        0 => 1,
        1 => 512,
        _ => 64,
    };
    let mut best = (0usize, Vec::new(), f64::INFINITY);
    for (c, chart) in immersion.charts.iter().enumerate() {
        let mut idx = vec![0usize; k];
        for _ in 0..per_axis.pow(k as u32) {
            let s: Vec<f64> = idx
                .iter()
                .map(|&i| (i as f64 + 0.5) / per_axis as f64)
                .collect();
            let z = chart.from_unit(&s);
            let d = (immersion.point(t, c, &z)? - target).norm();
            if d < best.2 {
                best = (c, z, d);
            }
            for i in idx.iter_mut() {
                *i += 1;
                if *i < per_axis {
                    break;
                }
                *i = 0;
            }
        }
    }
    let (c, mut z, _) = best;
    let chart = &immersion.charts[c];
    for _ in 0..100 {
        if k == 0 {
            break;
        }
        let j = immersion.differential(t, c, &z)?;
        let r = target - immersion.point(t, c, &z)?;
        let Some(step) = linalg::gram(&j).lu().solve(&(j.transpose() * r)) else {
            break;
        };
        for i in 0..k {
            z[i] += step[i];
        }
        chart.normalize(&mut z);
        if step.norm() < 1e-16 * chart.diameter() {
            break;
        }
    }
    let distance = (immersion.point(t, c, &z)? - target).norm();
    if distance > match_tol {
        return Err(TransportError::MatchFailure {
            distance,
            tol: match_tol,
        });
    }
    Ok((c, z))
}

/// Largest disagreement in `V∂` between the domain's boundary immersion and an
/// alternative immersion of the same boundary, over `samples` random points of
/// the alternative's parameter manifold.
pub fn reparametrization_gap(
    domain: &EvolvingDomain,
    alt: &BoundaryImmersion,
    t: f64,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if samples == 0 {
        return Err(TransportError::InvalidInput("samples must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gap: f64 = 0.0;
    for i in 0..samples {
        let c = i % alt.charts.len();
        let chart = &alt.charts[c];
        let s: Vec<f64> = (0..chart.dim()).map(|_| rng.gen::<f64>()).collect();
        let z = chart.from_unit(&s);
        let alt_geom = geometry_with(domain, alt, t, c, &z)?;
        let (pc, pz) =
            nearest_boundary_param(&domain.boundary, t, &alt_geom.point, domain.tolerances.match_tol)?;
        let primary = boundary_geometry(domain, t, pc, &pz)?;
        gap = gap.max((primary.normal_velocity - alt_geom.normal_velocity).abs());
    }
    Ok(gap)
}

/// Winding number of a closed polygon around `(px, py)` (signed crossings of
/// the ray towards `+x`).
pub fn winding_number(px: f64, py: f64, polygon: &[[f64; 2]]) -> i32 {
    let n = polygon.len();
    let mut winding = 0;
    for i in 0..n {
        let a = polygon[i];
        let b = polygon[(i + 1) % n];
        let side = (b[0] - a[0]) * (py - a[1]) - (px - a[0]) * (b[1] - a[1]);
        if a[1] <= py {
            if b[1] > py && side > 0.0 {
                winding += 1;
            }
        } else if b[1] <= py && side < 0.0 {
            winding -= 1;
        }
    }
    winding
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn jacobian_of_orthonormal_and_single_columns() {
        let id = DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert_relative_eq!(immersion_jacobian(&id, 1e-10).unwrap(), 1.0, epsilon = 1e-15);
        let col = DMatrix::from_column_slice(3, 1, &[3.0, 4.0, 0.0]);
        assert_relative_eq!(immersion_jacobian(&col, 1e-10).unwrap(), 5.0, epsilon = 1e-14);
    }

    #[test]
    fn rank_deficient_jacobian() {
        let z = DMatrix::from_column_slice(2, 1, &[0.0, 0.0]);
        assert!(matches!(
            immersion_jacobian(&z, 1e-10),
            Err(TransportError::RankDeficient { .. })
        ));
    }

    #[test]
    fn winding_of_square_and_figure_eight() {
        let square = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert_eq!(winding_number(0.5, 0.5, &square), 1);
        assert_eq!(winding_number(1.5, 0.5, &square), 0);
        let reversed: Vec<[f64; 2]> = square.iter().rev().cloned().collect();
        assert_eq!(winding_number(0.5, 0.5, &reversed), -1);
        // two lobes traversed in opposite senses
        let eight: Vec<[f64; 2]> = (0..400)
            .map(|k| {
                let th = std::f64::consts::TAU * k as f64 / 400.0;
                [th.sin(), 0.5 * (2.0 * th).sin()]
            })
            .collect();
        let right = winding_number(0.5, 0.1, &eight);
        let left = winding_number(-0.5, 0.1, &eight);
        assert_eq!(right.abs(), 1);
        assert_eq!(left, -right);
        assert_eq!(winding_number(0.0, 0.4, &eight), 0);
    }

    #[test]
    fn projections() {
        let frame = TangentFrame::new(
            DVector::zeros(2),
            DMatrix::from_column_slice(2, 1, &[1.0, 0.0]),
            1e-10,
        )
        .unwrap();
        let w = DVector::from_vec(vec![3.0, 4.0]);
        assert_eq!(tangent_projection(&frame, &w), DVector::from_vec(vec![3.0, 0.0]));

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let diag = TangentFrame::new(
            DVector::zeros(3),
            DMatrix::from_column_slice(3, 1, &[s, s, 0.0]),
            1e-10,
        )
        .unwrap();
        let pw = tangent_projection(&diag, &DVector::from_vec(vec![1.0, 0.0, 0.0]));
        assert_relative_eq!(pw[0], 0.5, epsilon = 1e-15);
        assert_relative_eq!(pw[1], 0.5, epsilon = 1e-15);
        assert_relative_eq!(pw[2], 0.0, epsilon = 1e-15);
        let in_span = DVector::from_vec(vec![2.0, 2.0, 0.0]);
        assert!((tangent_projection(&diag, &in_span) - &in_span).norm() < 1e-15);
    }
}
