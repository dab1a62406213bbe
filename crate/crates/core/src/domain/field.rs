use std::sync::Arc;

use nalgebra::DVector;

use crate::error::Result;
use crate::linalg::{ensure_finite, ensure_finite_vec};

pub type FieldFn = Arc<dyn Fn(f64, &DVector<f64>) -> f64 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(f64, &DVector<f64>) -> DVector<f64> + Send + Sync>;

/// Time-dependent scalar field `φ(t, x)` on the ambient space.
#[derive(Clone)]
pub struct ScalarField {
    value: FieldFn,
    time_partial: Option<FieldFn>,
    gradient: Option<GradientFn>,
    pub delta_time: f64,
}

impl std::fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarField")
            .field("analytic_time_partial", &self.time_partial.is_some())
            .field("gradient", &self.gradient.is_some())
            .finish()
    }
}

impl ScalarField {
    pub fn new(value: FieldFn) -> Self {
        ScalarField {
            value,
            time_partial: None,
            gradient: None,
            delta_time: 1e-6,
        }
    }

    pub fn constant(c: f64) -> Self {
        ScalarField::new(Arc::new(move |_, _| c))
            .with_time_partial(Arc::new(|_, _| 0.0))
            .with_gradient(Arc::new(|_, x: &DVector<f64>| DVector::zeros(x.len())))
    }

    pub fn with_time_partial(mut self, partial: FieldFn) -> Self {
        self.time_partial = Some(partial);
        self
    }

    pub fn with_gradient(mut self, gradient: GradientFn) -> Self {
        self.gradient = Some(gradient);
        self
    }

    pub fn with_delta_time(mut self, delta_time: f64) -> Self {
        self.delta_time = delta_time;
        self
    }

    pub fn has_time_partial(&self) -> bool {
        self.time_partial.is_some()
    }

    pub fn has_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    pub fn value(&self, t: f64, x: &DVector<f64>) -> Result<f64> {
        ensure_finite("scalar field", (self.value)(t, x))
    }

    /// `φ'(t, x)`, analytic when supplied, otherwise a central difference.
    pub fn time_partial(&self, t: f64, x: &DVector<f64>) -> Result<f64> {
        let v = match &self.time_partial {
            Some(p) => p(t, x),
            None => self.fd_time_partial(t, x, self.delta_time),
        };
        ensure_finite("scalar field time partial", v)
    }

    pub fn fd_time_partial(&self, t: f64, x: &DVector<f64>, step: f64) -> f64 {
        ((self.value)(t + step, x) - (self.value)(t - step, x)) / (2.0 * step)
    }

    pub fn gradient(&self, t: f64, x: &DVector<f64>) -> Option<Result<DVector<f64>>> {
        self.gradient.as_ref().map(|g| {
            let v = g(t, x);
            ensure_finite_vec("scalar field gradient", &v).map(|_| v)
        })
    }

    /// `α·self + β·other`; derivatives are combined when both operands carry them.
    pub fn linear_combination(&self, alpha: f64, other: &ScalarField, beta: f64) -> ScalarField {
        let (a, b) = (self.value.clone(), other.value.clone());
        let mut out = ScalarField::new(Arc::new(move |t, x| alpha * a(t, x) + beta * b(t, x)))
            .with_delta_time(self.delta_time.min(other.delta_time));
        if let (Some(pa), Some(pb)) = (self.time_partial.clone(), other.time_partial.clone()) {
            out.time_partial = Some(Arc::new(move |t, x| alpha * pa(t, x) + beta * pb(t, x)));
        }
        if let (Some(ga), Some(gb)) = (self.gradient.clone(), other.gradient.clone()) {
            out.gradient = Some(Arc::new(move |t, x| ga(t, x) * alpha + gb(t, x) * beta));
        }
        out
    }

    pub fn time_shifted(&self, shift: f64) -> ScalarField {
        let v = self.value.clone();
        let mut out = ScalarField::new(Arc::new(move |t, x| v(t - shift, x)))
            .with_delta_time(self.delta_time);
        if let Some(p) = self.time_partial.clone() {
            out.time_partial = Some(Arc::new(move |t, x| p(t - shift, x)));
        }
        if let Some(g) = self.gradient.clone() {
            out.gradient = Some(Arc::new(move |t, x| g(t - shift, x)));
        }
        out
    }
}
