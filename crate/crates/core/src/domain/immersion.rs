use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::chart::ParamBox;
use crate::error::Result;
use crate::linalg::{self, ensure_finite_mat, ensure_finite_vec};

/// `(t, chart index, z) → R^d`
pub type ChartedVecMap = Arc<dyn Fn(f64, usize, &[f64]) -> DVector<f64> + Send + Sync>;
/// `(t, chart index, z) → d × (m-1)`
pub type ChartedMatMap = Arc<dyn Fn(f64, usize, &[f64]) -> DMatrix<f64> + Send + Sync>;

/// Time-dependent immersion `f(t, z)` of a fixed `(m-1)`-dimensional parameter
/// manifold onto the boundary of the evolving set.
///
/// The parameter manifold is covered by one or more boxes; a box of dimension
/// zero is a single point, so the boundary of an interval is two point charts.
#[derive(Clone)]
pub struct BoundaryImmersion {
    pub charts: Vec<ParamBox>,
    map: ChartedVecMap,
    time_derivative: Option<ChartedVecMap>,
    space_jacobian: Option<ChartedMatMap>,
    pub delta_time: f64,
}

impl std::fmt::Debug for BoundaryImmersion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BoundaryImmersion")
            .field("charts", &self.charts)
            .field("analytic_velocity", &self.time_derivative.is_some())
            .field("analytic_jacobian", &self.space_jacobian.is_some())
            .finish()
    }
}

impl BoundaryImmersion {
    pub fn new(charts: Vec<ParamBox>, map: ChartedVecMap) -> Self {
        assert!(!charts.is_empty(), "an immersion needs at least one chart");
        let dim = charts[0].dim();
        assert!(
            charts.iter().all(|c| c.dim() == dim),
            "all boundary charts must share one dimension"
        );
        BoundaryImmersion {
            charts,
            map,
            time_derivative: None,
            space_jacobian: None,
            delta_time: 1e-6,
        }
    }

    pub fn with_time_derivative(mut self, velocity: ChartedVecMap) -> Self {
        self.time_derivative = Some(velocity);
        self
    }

    pub fn with_space_jacobian(mut self, jacobian: ChartedMatMap) -> Self {
        self.space_jacobian = Some(jacobian);
        self
    }

    pub fn with_delta_time(mut self, delta_time: f64) -> Self {
        self.delta_time = delta_time;
        self
    }

    /// Dimension of the parameter manifold, `m - 1`.
    pub fn param_dim(&self) -> usize {
        self.charts[0].dim()
    }

    pub fn has_analytic_velocity(&self) -> bool {
        self.time_derivative.is_some()
    }

    pub fn point(&self, t: f64, chart: usize, z: &[f64]) -> Result<DVector<f64>> {
        let p = (self.map)(t, chart, z);
        ensure_finite_vec("boundary immersion", &p)?;
        Ok(p)
    }

    /// `∂f/∂t` at fixed `z`.
    pub fn velocity(&self, t: f64, chart: usize, z: &[f64]) -> Result<DVector<f64>> {
        let v = match &self.time_derivative {
            Some(d) => d(t, chart, z),
            None => self.fd_velocity(t, chart, z, self.delta_time),
        };
        ensure_finite_vec("boundary velocity", &v)?;
        Ok(v)
    }

    /// Central difference of the immersion in time at the given step.
    pub fn fd_velocity(&self, t: f64, chart: usize, z: &[f64], step: f64) -> DVector<f64> {
        linalg::central_difference(|s| (self.map)(s, chart, z), t, step)
    }

    /// `d × (m-1)` spatial differential.
    pub fn differential(&self, t: f64, chart: usize, z: &[f64]) -> Result<DMatrix<f64>> {
        let j = match &self.space_jacobian {
            Some(jac) => jac(t, chart, z),
            None => {
                let step = 1e-6 * self.charts[chart].diameter();
                linalg::central_jacobian(|v| (self.map)(t, chart, v), z, step)
            }
        };
        ensure_finite_mat("boundary differential", &j)?;
        Ok(j)
    }

    /// Same immersion evaluated at `t - shift`.
    pub fn time_shifted(&self, shift: f64) -> Self {
        let map = self.map.clone();
        let mut out = BoundaryImmersion::new(
            self.charts.clone(),
            Arc::new(move |t, c, z| map(t - shift, c, z)),
        )
        .with_delta_time(self.delta_time);
        if let Some(d) = self.time_derivative.clone() {
            out.time_derivative = Some(Arc::new(move |t, c, z| d(t - shift, c, z)));
        }
        if let Some(j) = self.space_jacobian.clone() {
            out.space_jacobian = Some(Arc::new(move |t, c, z| j(t - shift, c, z)));
        }
        out
    }
}
