use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::chart::{ManifoldChart, ParamBox};
use super::immersion::BoundaryImmersion;
use crate::error::{Result, TransportError};
use crate::linalg::{self, ensure_finite_mat, ensure_finite_vec};

pub type TimeVecMap = Arc<dyn Fn(f64, &[f64]) -> DVector<f64> + Send + Sync>;
pub type TimeMatMap = Arc<dyn Fn(f64, &[f64]) -> DMatrix<f64> + Send + Sync>;
pub type Membership = Arc<dyn Fn(f64, &DVector<f64>) -> bool + Send + Sync>;
pub type ExceptionalPoints = Arc<dyn Fn(f64) -> Vec<DVector<f64>> + Send + Sync>;

/// Numerical tolerances and finite-difference steps used by the geometry kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Gram determinants at or below this are rank deficient.
    pub rank_tol: f64,
    pub proj_tol: f64,
    pub unit_tol: f64,
    pub match_tol: f64,
    /// Maximum distance from a boundary point to `M`.
    pub surface_tol: f64,
    /// Length of the straight-line membership probes used to orient normals.
    pub probe_eps: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank_tol: 1e-10,
            proj_tol: 1e-8,
            unit_tol: 1e-10,
            match_tol: 1e-8,
            surface_tol: 1e-9,
            probe_eps: 1e-4,
        }
    }
}

/// One piece of a time-dependent parametrization of the open set `O_t`.
#[derive(Clone)]
pub struct BulkPiece {
    pub param_box: ParamBox,
    map: TimeVecMap,
    jacobian: Option<TimeMatMap>,
    time_derivative: Option<TimeVecMap>,
    pub delta_time: f64,
}

impl BulkPiece {
    pub fn new(param_box: ParamBox, map: TimeVecMap) -> Self {
        BulkPiece {
            param_box,
            map,
            jacobian: None,
            time_derivative: None,
            delta_time: 1e-6,
        }
    }

    pub fn with_jacobian(mut self, jacobian: TimeMatMap) -> Self {
        self.jacobian = Some(jacobian);
        self
    }

    pub fn with_time_derivative(mut self, velocity: TimeVecMap) -> Self {
        self.time_derivative = Some(velocity);
        self
    }

    pub fn point(&self, t: f64, u: &[f64]) -> Result<DVector<f64>> {
        let p = (self.map)(t, u);
        ensure_finite_vec("bulk parametrization", &p)?;
        Ok(p)
    }

    pub fn differential(&self, t: f64, u: &[f64]) -> Result<DMatrix<f64>> {
        let j = match &self.jacobian {
            Some(jac) => jac(t, u),
            None => {
                let step = 1e-6 * self.param_box.diameter();
                linalg::central_jacobian(|v| (self.map)(t, v), u, step)
            }
        };
        ensure_finite_mat("bulk differential", &j)?;
        Ok(j)
    }

    pub fn velocity(&self, t: f64, u: &[f64]) -> Result<DVector<f64>> {
        let v = match &self.time_derivative {
            Some(d) => d(t, u),
            None => linalg::central_difference(|s| (self.map)(s, u), t, self.delta_time),
        };
        ensure_finite_vec("bulk velocity", &v)?;
        Ok(v)
    }

    fn time_shifted(&self, shift: f64) -> Self {
        let map = self.map.clone();
        let mut out = BulkPiece::new(
            self.param_box.clone(),
            Arc::new(move |t, u| map(t - shift, u)),
        );
        out.delta_time = self.delta_time;
        if let Some(j) = self.jacobian.clone() {
            out.jacobian = Some(Arc::new(move |t, u| j(t - shift, u)));
        }
        if let Some(d) = self.time_derivative.clone() {
            out.time_derivative = Some(Arc::new(move |t, u| d(t - shift, u)));
        }
        out
    }
}

/// A regularly evolving open set `O_t` in a fixed embedded manifold `M`.
#[derive(Clone)]
pub struct EvolvingDomain {
    pub manifold: ManifoldChart,
    pub boundary: BoundaryImmersion,
    pub bulk: Option<Vec<BulkPiece>>,
    membership: Option<Membership>,
    exceptional_points: Option<ExceptionalPoints>,
    pub tolerances: Tolerances,
}

impl std::fmt::Debug for EvolvingDomain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EvolvingDomain")
            .field("manifold", &self.manifold)
            .field("boundary", &self.boundary)
            .field("bulk_pieces", &self.bulk.as_ref().map(|b| b.len()))
            .field("membership", &self.membership.is_some())
            .field("tolerances", &self.tolerances)
            .finish()
    }
}

impl EvolvingDomain {
    pub fn new(manifold: ManifoldChart, boundary: BoundaryImmersion) -> Self {
        assert_eq!(
            boundary.param_dim() + 1,
            manifold.dim(),
            "boundary parameter dimension must be one less than the manifold dimension"
        );
        let tolerances = Tolerances {
            probe_eps: 1e-4 * manifold.param_domain.diameter(),
            ..Tolerances::default()
        };
        EvolvingDomain {
            manifold,
            boundary,
            bulk: None,
            membership: None,
            exceptional_points: None,
            tolerances,
        }
    }

    pub fn with_bulk(mut self, pieces: Vec<BulkPiece>) -> Self {
        assert!(
            pieces.iter().all(|p| p.param_box.dim() == self.manifold.dim()),
            "bulk pieces must be parametrized by boxes of the manifold dimension"
        );
        self.bulk = Some(pieces);
        self
    }

    pub fn with_membership(mut self, membership: Membership) -> Self {
        self.membership = Some(membership);
        self
    }

    /// Declares the self-intersection points of the boundary image at each time.
    pub fn with_exceptional_points(mut self, points: ExceptionalPoints) -> Self {
        self.exceptional_points = Some(points);
        self
    }

    pub fn with_tolerances(mut self, tolerances: Tolerances) -> Self {
        self.tolerances = tolerances;
        self
    }

    /// Sets every finite-difference time step to `1e-6 × window length`.
    pub fn with_time_scale(mut self, window_length: f64) -> Self {
        let dt = 1e-6 * window_length;
        self.boundary.delta_time = dt;
        if let Some(pieces) = self.bulk.as_mut() {
            for p in pieces {
                p.delta_time = dt;
            }
        }
        self
    }

    /// Intrinsic dimension `m` of the ambient manifold.
    pub fn dim(&self) -> usize {
        self.manifold.dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.manifold.ambient_dim
    }

    pub fn has_membership(&self) -> bool {
        self.membership.is_some()
    }

    pub fn is_inside(&self, t: f64, p: &DVector<f64>) -> Result<bool> {
        ensure_finite_vec("membership query", p)?;
        match &self.membership {
            Some(m) => Ok(m(t, p)),
            None => Err(TransportError::InvalidInput(
                "domain has no membership predicate".into(),
            )),
        }
    }

    pub fn exceptional_points(&self, t: f64) -> Vec<DVector<f64>> {
        self.exceptional_points
            .as_ref()
            .map(|f| f(t))
            .unwrap_or_default()
    }

    /// Declared number of boundary self-intersection points at time `t`.
    pub fn exceptional_set_size(&self, t: f64) -> usize {
        self.exceptional_points(t).len()
    }

    /// Distance from `p` to the nearest declared self-intersection point.
    pub fn distance_to_exceptional(&self, t: f64, p: &DVector<f64>) -> f64 {
        self.exceptional_points(t)
            .iter()
            .map(|q| (q - p).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// The same scene with time relabelled `t ↦ t + shift`.
    pub fn time_shifted(&self, shift: f64) -> Self {
        let mut out = self.clone();
        out.boundary = self.boundary.time_shifted(shift);
        out.bulk = self
            .bulk
            .as_ref()
            .map(|pieces| pieces.iter().map(|p| p.time_shifted(shift)).collect());
        if let Some(m) = self.membership.clone() {
            out.membership = Some(Arc::new(move |t, p| m(t - shift, p)));
        }
        if let Some(e) = self.exceptional_points.clone() {
            out.exceptional_points = Some(Arc::new(move |t| e(t - shift)));
        }
        out
    }
}
