use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, TransportError};
use crate::linalg::{self, ensure_finite_mat, ensure_finite_vec};

pub type VecMap = Arc<dyn Fn(&[f64]) -> DVector<f64> + Send + Sync>;
pub type MatMap = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

/// Axis-aligned box in parameter space, with optional periodic identification
/// of opposite faces along each axis (a glued seam).
#[derive(Debug, Clone, PartialEq)]
pub struct ParamBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub periodic: Vec<bool>,
}

impl ParamBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        assert_eq!(lower.len(), upper.len(), "box corners differ in dimension");
        assert!(
            lower.iter().zip(&upper).all(|(l, u)| l < u),
            "box lower corner must lie strictly below the upper corner"
        );
        let periodic = vec![false; lower.len()];
        ParamBox {
            lower,
            upper,
            periodic,
        }
    }

    /// The zero-dimensional box: a single point carrying unit counting measure.
    pub fn point() -> Self {
        ParamBox {
            lower: Vec::new(),
            upper: Vec::new(),
            periodic: Vec::new(),
        }
    }

    /// Marks `axis` as periodic (its two faces are identified).
    pub fn with_periodic(mut self, axis: usize) -> Self {
        self.periodic[axis] = true;
        self
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.width(i)).product()
    }

    pub fn diameter(&self) -> f64 {
        (0..self.dim())
            .map(|i| self.width(i).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| 0.5 * (l + u))
            .collect()
    }

    /// Maps a point of the unit cube `[0,1]^k` into the box.
    pub fn from_unit(&self, s: &[f64]) -> Vec<f64> {
        s.iter()
            .enumerate()
            .map(|(i, si)| self.lower[i] + si * self.width(i))
            .collect()
    }

    /// Wraps periodic coordinates into the fundamental domain and clamps the rest.
    pub fn normalize(&self, u: &mut [f64]) {
        for i in 0..self.dim() {
            if self.periodic[i] {
                let w = self.width(i);
                u[i] = self.lower[i] + (u[i] - self.lower[i]).rem_euclid(w);
            } else {
                u[i] = u[i].clamp(self.lower[i], self.upper[i]);
            }
        }
    }

    /// Parameter distance respecting periodic identifications.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        (0..self.dim())
            .map(|i| {
                let mut d = (a[i] - b[i]).abs();
                if self.periodic[i] {
                    d = d.min(self.width(i) - d);
                }
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Parametrization of a coordinate patch of the fixed ambient manifold `M ⊂ R^d`.
#[derive(Clone)]
pub struct ManifoldChart {
    pub param_domain: ParamBox,
    pub ambient_dim: usize,
    embed: VecMap,
    embed_jacobian: Option<MatMap>,
    closest_param: Option<VecMap>,
    /// Finite-difference step for the embedding differential when no analytic
    /// Jacobian is supplied.
    pub delta_geom: f64,
}

impl std::fmt::Debug for ManifoldChart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ManifoldChart")
            .field("param_domain", &self.param_domain)
            .field("ambient_dim", &self.ambient_dim)
            .field("analytic_jacobian", &self.embed_jacobian.is_some())
            .finish()
    }
}

impl ManifoldChart {
    pub fn new(param_domain: ParamBox, ambient_dim: usize, embed: VecMap) -> Self {
        assert!(param_domain.dim() >= 1, "manifold dimension must be at least one");
        assert!(ambient_dim >= param_domain.dim());
        let delta_geom = 1e-6 * param_domain.diameter();
        ManifoldChart {
            param_domain,
            ambient_dim,
            embed,
            embed_jacobian: None,
            closest_param: None,
            delta_geom,
        }
    }

    /// Open subset of flat `R^d` with the identity chart; `lower`/`upper` bound
    /// the region used for Monte Carlo sampling.
    pub fn euclidean(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        let d = lower.len();
        let mut chart = ManifoldChart::new(
            ParamBox::new(lower, upper),
            d,
            Arc::new(|u: &[f64]| DVector::from_column_slice(u)),
        );
        chart.embed_jacobian = Some(Arc::new(move |_u: &[f64]| DMatrix::identity(d, d)));
        chart.closest_param = Some(Arc::new(|x: &[f64]| DVector::from_column_slice(x)));
        chart
    }

    pub fn with_jacobian(mut self, jacobian: MatMap) -> Self {
        self.embed_jacobian = Some(jacobian);
        self
    }

    /// Supplies the inverse of the chart composed with nearest-point projection.
    pub fn with_closest_param(mut self, closest: VecMap) -> Self {
        self.closest_param = Some(closest);
        self
    }

    pub fn dim(&self) -> usize {
        self.param_domain.dim()
    }

    pub fn is_flat(&self) -> bool {
        self.dim() == self.ambient_dim
    }

    pub fn embed(&self, u: &[f64]) -> Result<DVector<f64>> {
        let p = (self.embed)(u);
        ensure_finite_vec("manifold embedding", &p)?;
        Ok(p)
    }

    /// `d × m` differential of the embedding.
    pub fn jacobian(&self, u: &[f64]) -> Result<DMatrix<f64>> {
        let j = match &self.embed_jacobian {
            Some(jac) => jac(u),
            None => linalg::central_jacobian(|v| (self.embed)(v), u, self.delta_geom),
        };
        ensure_finite_mat("manifold differential", &j)?;
        Ok(j)
    }

    /// Chart coordinates of the point of `M` nearest to `x`.
    pub fn closest_param(&self, x: &DVector<f64>) -> Result<Vec<f64>> {
        if let Some(closest) = &self.closest_param {
            let u = closest(x.as_slice());
            ensure_finite_vec("closest chart parameter", &u)?;
            return Ok(u.as_slice().to_vec());
        }
        self.gauss_newton_closest(x)
    }

    /// Nearest point of `M` to `x`.
    pub fn project(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if self.is_flat() {
            return Ok(x.clone());
        }
        let u = self.closest_param(x)?;
        self.embed(&u)
    }

    /// Columns spanning `T_pM` at the manifold point nearest to `x`.
    pub fn tangent_basis(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let u = self.closest_param(x)?;
        self.jacobian(&u)
    }

    fn gauss_newton_closest(&self, x: &DVector<f64>) -> Result<Vec<f64>> {
        let m = self.dim();
        let per_axis: usize = match m {
            1 => 64,
            2 => 24,
            _ => 10,
        };
        let total = per_axis.pow(m as u32);
        let mut best = self.param_domain.center();
        let mut best_dist = f64::INFINITY;
        let mut idx = vec![0usize; m];
        for _ in 0..total {
            let s: Vec<f64> = idx
                .iter()
                .map(|&k| (k as f64 + 0.5) / per_axis as f64)
                .collect();
            let u = self.param_domain.from_unit(&s);
            let d = (self.embed(&u)? - x).norm();
            if d < best_dist {
                best_dist = d;
                best = u;
            }
            for k in idx.iter_mut() {
                *k += 1;
                if *k < per_axis {
                    break;
                }
                *k = 0;
            }
        }
        let mut u = best;
        let tiny = 1e-15 * self.param_domain.diameter().max(1.0);
        for _ in 0..60 {
            let j = self.jacobian(&u)?;
            let r = x - self.embed(&u)?;
            let g = linalg::gram(&j);
            let rhs = j.transpose() * r;
            let Some(step) = g.lu().solve(&rhs) else {
                return Err(TransportError::RankDeficient {
                    gram_det: 0.0,
                    tol: 0.0,
                });
            };
            for i in 0..m {
                u[i] += step[i];
            }
            self.param_domain.normalize(&mut u);
            if step.norm() < tiny {
                break;
            }
        }
        Ok(u)
    }
}
