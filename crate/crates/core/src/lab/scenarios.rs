//! Built-in registry of evolving domains with analytic boundary motion,
//! bulk parametrizations and, where available, closed-form reference values.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::fields;
use crate::domain::{BoundaryImmersion, BulkPiece, EvolvingDomain, ManifoldChart, ParamBox, ScalarField};
use crate::error::{Result, TransportError};
use crate::spacetime::SpaceTimeField;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A scalar function of time with an optional analytic derivative.
#[derive(Clone)]
pub struct TimeFunction {
    value: RealFn,
    derivative: Option<RealFn>,
}

impl TimeFunction {
    pub fn new(value: RealFn, derivative: RealFn) -> Self {
        TimeFunction {
            value,
            derivative: Some(derivative),
        }
    }

    /// Derivative taken by central differences with step `1e-6`.
    pub fn without_derivative(value: RealFn) -> Self {
        TimeFunction {
            value,
            derivative: None,
        }
    }

    pub fn constant(c: f64) -> Self {
        TimeFunction::new(Arc::new(move |_| c), Arc::new(|_| 0.0))
    }

    /// `c0 + c1 t`
    pub fn linear(c0: f64, c1: f64) -> Self {
        TimeFunction::new(Arc::new(move |t| c0 + c1 * t), Arc::new(move |_| c1))
    }

    /// `c0 + c1 t + c2 t²`
    pub fn quadratic(c0: f64, c1: f64, c2: f64) -> Self {
        TimeFunction::new(
            Arc::new(move |t| c0 + c1 * t + c2 * t * t),
            Arc::new(move |t| c1 + 2.0 * c2 * t),
        )
    }

    pub fn at(&self, t: f64) -> f64 {
        (self.value)(t)
    }

    pub fn rate(&self, t: f64) -> f64 {
        match &self.derivative {
            Some(d) => d(t),
            None => {
                let h = 1e-6;
                ((self.value)(t + h) - (self.value)(t - h)) / (2.0 * h)
            }
        }
    }
}

/// Closed-form `I(t) = ∫_{O_t} φ` and `dI/dt`.
#[derive(Clone)]
pub struct ClosedForm {
    pub integral: RealFn,
    pub derivative: RealFn,
}

impl ClosedForm {
    fn new(integral: RealFn, derivative: RealFn) -> Self {
        ClosedForm {
            integral,
            derivative,
        }
    }

    fn shifted(&self, shift: f64) -> Self {
        let (i, d) = (self.integral.clone(), self.derivative.clone());
        ClosedForm::new(Arc::new(move |t| i(t - shift)), Arc::new(move |t| d(t - shift)))
    }
}

#[derive(Clone)]
pub struct NamedField {
    pub name: String,
    pub field: ScalarField,
    pub reference: Option<ClosedForm>,
}

impl NamedField {
    fn new(name: &str, field: ScalarField) -> Self {
        NamedField {
            name: name.to_string(),
            field,
            reference: None,
        }
    }

    fn library(name: &str) -> Self {
        NamedField::new(name, fields::by_name(name).expect("library field"))
    }

    fn with_reference(mut self, integral: RealFn, derivative: RealFn) -> Self {
        self.reference = Some(ClosedForm::new(integral, derivative));
        self
    }
}

/// A named evolving domain with its time window, fields and reference data.
#[derive(Clone)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub domain: EvolvingDomain,
    pub time_window: (f64, f64),
    pub fields: Vec<NamedField>,
    pub divergence_fields: Vec<(String, SpaceTimeField)>,
    /// Second immersion of the same boundary, for reparametrization checks.
    pub alternate_boundary: Option<BoundaryImmersion>,
    /// Smooth scenarios have no boundary self-intersections anywhere in the window.
    pub smooth: bool,
    pub tolerance_override: Option<f64>,
    /// Extra times of interest checked alongside the interior grid.
    pub checkpoints: Vec<f64>,
}

impl std::fmt::Debug for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Scenario")
            .field("name", &self.name)
            .field("time_window", &self.time_window)
            .field("fields", &self.field_names())
            .finish()
    }
}

/// Default residual tolerance on scenes without boundary self-intersections.
pub const SMOOTH_TOLERANCE: f64 = 1e-6;
/// Default residual tolerance at times where the boundary intersects itself.
pub const IRREGULAR_TOLERANCE: f64 = 1e-4;

impl Scenario {
    pub fn new(name: &str, description: &str, domain: EvolvingDomain, time_window: (f64, f64)) -> Self {
        assert!(time_window.0 < time_window.1, "empty time window");
        let len = time_window.1 - time_window.0;
        Scenario {
            name: name.to_string(),
            description: description.to_string(),
            domain: domain.with_time_scale(len),
            time_window,
            fields: Vec::new(),
            divergence_fields: Vec::new(),
            alternate_boundary: None,
            smooth: true,
            tolerance_override: None,
            checkpoints: Vec::new(),
        }
    }

    fn with_fields(mut self, fields: Vec<NamedField>) -> Self {
        let dt = 1e-6 * self.window_length();
        self.fields = fields
            .into_iter()
            .map(|mut f| {
                f.field = f.field.with_delta_time(dt);
                f
            })
            .collect();
        self
    }

    fn with_checkpoints(mut self, times: &[f64]) -> Self {
        self.checkpoints = times.to_vec();
        self
    }

    fn with_divergence_fields(mut self, fields: Vec<(String, SpaceTimeField)>) -> Self {
        self.divergence_fields = fields;
        self
    }

    pub fn window_length(&self) -> f64 {
        self.time_window.1 - self.time_window.0
    }

    pub fn field_names(&self) -> Vec<&str> {
        self.fields.iter().map(|f| f.name.as_str()).collect()
    }

    pub fn field(&self, name: &str) -> Result<&NamedField> {
        self.fields
            .iter()
            .find(|f| f.name == name)
            .ok_or_else(|| TransportError::UnknownField {
                scenario: self.name.clone(),
                field: name.to_string(),
            })
    }

    /// Residual tolerance at `t`: the override if set, otherwise the smooth
    /// default, relaxed wherever the boundary is declared self-intersecting.
    pub fn tolerance_at(&self, t: f64) -> f64 {
        self.tolerance_override.unwrap_or_else(|| {
            if self.domain.exceptional_set_size(t) > 0 {
                IRREGULAR_TOLERANCE
            } else {
                SMOOTH_TOLERANCE
            }
        })
    }

    /// Default finite-difference step, `1e-4 × window length`.
    pub fn default_h(&self) -> f64 {
        1e-4 * self.window_length()
    }

    /// `k` equally spaced times strictly inside the window.
    pub fn interior_times(&self, k: usize) -> Vec<f64> {
        let (lo, len) = (self.time_window.0, self.window_length());
        (1..=k).map(|i| lo + len * i as f64 / (k + 1) as f64).collect()
    }

    /// `k ≥ 2` equally spaced times including both window ends.
    pub fn uniform_times(&self, k: usize) -> Vec<f64> {
        let (lo, len) = (self.time_window.0, self.window_length());
        (0..k).map(|i| lo + len * i as f64 / (k - 1) as f64).collect()
    }

    pub fn contains_time(&self, t: f64) -> bool {
        t >= self.time_window.0 && t <= self.time_window.1
    }

    /// Whether `M` is an open subset of flat `R^m`.
    pub fn is_flat(&self) -> bool {
        self.domain.manifold.is_flat()
    }

    /// The scenario with time relabelled `t ↦ t + shift`.
    pub fn time_shifted(&self, shift: f64) -> Scenario {
        Scenario {
            name: self.name.clone(),
            description: self.description.clone(),
            domain: self.domain.time_shifted(shift),
            time_window: (self.time_window.0 + shift, self.time_window.1 + shift),
            fields: self
                .fields
                .iter()
                .map(|f| NamedField {
                    name: f.name.clone(),
                    field: f.field.time_shifted(shift),
                    reference: f.reference.as_ref().map(|r| r.shifted(shift)),
                })
                .collect(),
            divergence_fields: self
                .divergence_fields
                .iter()
                .map(|(n, a)| (n.clone(), a.time_shifted(shift)))
                .collect(),
            alternate_boundary: self.alternate_boundary.as_ref().map(|b| b.time_shifted(shift)),
            smooth: self.smooth,
            tolerance_override: self.tolerance_override,
            checkpoints: self.checkpoints.iter().map(|t| t + shift).collect(),
        }
    }
}

/// Names of every registry scenario, in registry order.
pub const SCENARIO_NAMES: [&str; 11] = [
    "static-interval",
    "leibniz-interval",
    "static-disk",
    "shrinking-disk",
    "translating-ellipse",
    "expanding-ball",
    "static-ball",
    "spherical-cap",
    "torus-patch",
    "figure-eight",
    "symmetric-interval",
];

pub fn registry() -> Vec<Scenario> {
    SCENARIO_NAMES
        .iter()
        .map(|n| scenario(n).expect("registry names resolve"))
        .collect()
}

pub fn scenario(name: &str) -> Result<Scenario> {
    Ok(match name {
        "static-interval" => static_interval(),
        "leibniz-interval" => leibniz_interval(),
        "symmetric-interval" => symmetric_interval(),
        "static-disk" => static_disk(),
        "shrinking-disk" => shrinking_disk(),
        "translating-ellipse" => translating_ellipse(),
        "expanding-ball" => expanding_ball(),
        "static-ball" => static_ball(),
        "spherical-cap" => spherical_cap(),
        "torus-patch" => torus_patch(),
        "figure-eight" => figure_eight(),
        other => return Err(TransportError::UnknownScenario(other.to_string())),
    })
}

// ---------------------------------------------------------------------------
// intervals on the real line

/// `O_t = (a(t), b(t)) ⊂ R`. The boundary is two point charts.
pub fn interval_domain(a: TimeFunction, b: TimeFunction, bounds: (f64, f64)) -> EvolvingDomain {
    let manifold = ManifoldChart::euclidean(vec![bounds.0], vec![bounds.1]);
    let (a1, b1) = (a.clone(), b.clone());
    let (a2, b2) = (a.clone(), b.clone());
    let boundary = BoundaryImmersion::new(
        vec![ParamBox::point(), ParamBox::point()],
        Arc::new(move |t, c, _| DVector::from_element(1, if c == 0 { a1.at(t) } else { b1.at(t) })),
    )
    .with_time_derivative(Arc::new(move |t, c, _| {
        DVector::from_element(1, if c == 0 { a2.rate(t) } else { b2.rate(t) })
    }))
    .with_space_jacobian(Arc::new(|_, _, _| DMatrix::zeros(1, 0)));

    let (a3, b3, a4, b4, a5, b5) = (a.clone(), b.clone(), a.clone(), b.clone(), a.clone(), b.clone());
    let bulk = BulkPiece::new(
        ParamBox::new(vec![0.0], vec![1.0]),
        Arc::new(move |t, u| {
            let (lo, hi) = (a3.at(t), b3.at(t));
            DVector::from_element(1, lo + u[0] * (hi - lo))
        }),
    )
    .with_jacobian(Arc::new(move |t, _| DMatrix::from_element(1, 1, b4.at(t) - a4.at(t))))
    .with_time_derivative(Arc::new(move |t, u| {
        let (da, db) = (a5.rate(t), b5.rate(t));
        DVector::from_element(1, da + u[0] * (db - da))
    }));

    EvolvingDomain::new(manifold, boundary)
        .with_bulk(vec![bulk])
        .with_membership(Arc::new(move |t, x| x[0] > a.at(t) && x[0] < b.at(t)))
}

fn interval_fields() -> Vec<(String, SpaceTimeField)> {
    fields::flat_divergence_fields(1)
}

fn static_interval() -> Scenario {
    let domain = interval_domain(TimeFunction::constant(0.0), TimeFunction::constant(1.0), (-1.0, 2.0));
    Scenario::new("static-interval", "O = (0, 1) in R, not moving", domain, (-1.0, 1.0))
        .with_fields(vec![
            NamedField::library("one").with_reference(Arc::new(|_| 1.0), Arc::new(|_| 0.0)),
            NamedField::library("x2").with_reference(Arc::new(|_| 1.0 / 3.0), Arc::new(|_| 0.0)),
            NamedField::library("wave").with_reference(
                Arc::new(|t: f64| 4.0 / 3.0 * t.cos()),
                Arc::new(|t: f64| -4.0 / 3.0 * t.sin()),
            ),
        ])
        .with_divergence_fields(interval_fields())
}

fn leibniz_interval() -> Scenario {
    let domain = interval_domain(
        TimeFunction::linear(0.0, 1.0),
        TimeFunction::quadratic(2.0, 0.0, 1.0),
        (-1.0, 8.0),
    );
    Scenario::new(
        "leibniz-interval",
        "O_t = (t, 2 + t²) in R, the Leibniz integral rule",
        domain,
        (0.0, 2.0),
    )
    .with_checkpoints(&[1.0])
    .with_fields(vec![
        NamedField::library("x").with_reference(
            Arc::new(|t: f64| 0.5 * ((2.0 + t * t).powi(2) - t * t)),
            Arc::new(|t: f64| (2.0 + t * t) * 2.0 * t - t),
        ),
        NamedField::library("one").with_reference(
            Arc::new(|t: f64| 2.0 + t * t - t),
            Arc::new(|t: f64| 2.0 * t - 1.0),
        ),
        NamedField::library("wave"),
    ])
    .with_divergence_fields(interval_fields())
}

fn symmetric_interval() -> Scenario {
    let domain = interval_domain(TimeFunction::linear(0.0, -1.0), TimeFunction::linear(0.0, 1.0), (-3.0, 3.0));
    Scenario::new("symmetric-interval", "O_t = (-t, t) in R", domain, (0.5, 1.5))
        .with_checkpoints(&[1.0])
        .with_fields(vec![
            NamedField::library("one").with_reference(Arc::new(|t| 2.0 * t), Arc::new(|_| 2.0)),
            NamedField::library("x2").with_reference(
                Arc::new(|t: f64| 2.0 * t.powi(3) / 3.0),
                Arc::new(|t: f64| 2.0 * t * t),
            ),
            NamedField::library("pulse"),
        ])
        .with_divergence_fields(interval_fields())
}

// ---------------------------------------------------------------------------
// planar ellipses and disks

/// Ellipse with center `(cx, cy)` and semi-axes `a`, `b`, all time dependent.
pub fn ellipse_domain(
    cx: TimeFunction,
    cy: TimeFunction,
    a: TimeFunction,
    b: TimeFunction,
    bounds: f64,
) -> EvolvingDomain {
    let manifold = ManifoldChart::euclidean(vec![-bounds; 2], vec![bounds; 2]);
    let circle = ParamBox::new(vec![0.0], vec![TAU]).with_periodic(0);

    let g = (cx.clone(), cy.clone(), a.clone(), b.clone());
    let map = {
        let g = g.clone();
        Arc::new(move |t: f64, _: usize, z: &[f64]| {
            DVector::from_vec(vec![
                g.0.at(t) + g.2.at(t) * z[0].cos(),
                g.1.at(t) + g.3.at(t) * z[0].sin(),
            ])
        })
    };
    let velocity = {
        let g = g.clone();
        Arc::new(move |t: f64, _: usize, z: &[f64]| {
            DVector::from_vec(vec![
                g.0.rate(t) + g.2.rate(t) * z[0].cos(),
                g.1.rate(t) + g.3.rate(t) * z[0].sin(),
            ])
        })
    };
    let jacobian = {
        let g = g.clone();
        Arc::new(move |t: f64, _: usize, z: &[f64]| {
            DMatrix::from_column_slice(2, 1, &[-g.2.at(t) * z[0].sin(), g.3.at(t) * z[0].cos()])
        })
    };
    let boundary = BoundaryImmersion::new(vec![circle], map)
        .with_time_derivative(velocity)
        .with_space_jacobian(jacobian);

    let polar = ParamBox::new(vec![0.0, 0.0], vec![1.0, TAU]).with_periodic(1);
    let bulk = {
        let (g1, g2, g3) = (g.clone(), g.clone(), g.clone());
        BulkPiece::new(
            polar,
            Arc::new(move |t, u| {
                DVector::from_vec(vec![
                    g1.0.at(t) + u[0] * g1.2.at(t) * u[1].cos(),
                    g1.1.at(t) + u[0] * g1.3.at(t) * u[1].sin(),
                ])
            }),
        )
        .with_jacobian(Arc::new(move |t, u| {
            let (a, b) = (g2.2.at(t), g2.3.at(t));
            let (c, s) = (u[1].cos(), u[1].sin());
            DMatrix::from_row_slice(2, 2, &[a * c, -u[0] * a * s, b * s, u[0] * b * c])
        }))
        .with_time_derivative(Arc::new(move |t, u| {
            DVector::from_vec(vec![
                g3.0.rate(t) + u[0] * g3.2.rate(t) * u[1].cos(),
                g3.1.rate(t) + u[0] * g3.3.rate(t) * u[1].sin(),
            ])
        }))
    };

    EvolvingDomain::new(manifold, boundary)
        .with_bulk(vec![bulk])
        .with_membership(Arc::new(move |t, x| {
            let dx = (x[0] - g.0.at(t)) / g.2.at(t);
            let dy = (x[1] - g.1.at(t)) / g.3.at(t);
            dx * dx + dy * dy < 1.0
        }))
}

fn disk_fields(r: TimeFunction) -> Vec<NamedField> {
    let (r1, r2, r3, r4, r5, r6) = (r.clone(), r.clone(), r.clone(), r.clone(), r.clone(), r);
    vec![
        NamedField::library("one").with_reference(
            Arc::new(move |t| PI * r1.at(t).powi(2)),
            Arc::new(move |t| TAU * r2.at(t) * r2.rate(t)),
        ),
        NamedField::library("x2").with_reference(
            Arc::new(move |t| 0.25 * PI * r3.at(t).powi(4)),
            Arc::new(move |t| PI * r4.at(t).powi(3) * r4.rate(t)),
        ),
        NamedField::library("wave").with_reference(
            Arc::new(move |t: f64| {
                let r = r5.at(t);
                t.cos() * (PI * r * r + 0.25 * PI * r.powi(4))
            }),
            Arc::new(move |t: f64| {
                let (r, dr) = (r6.at(t), r6.rate(t));
                -t.sin() * (PI * r * r + 0.25 * PI * r.powi(4))
                    + t.cos() * (TAU * r * dr + PI * r.powi(3) * dr)
            }),
        ),
        NamedField::library("pulse"),
    ]
}

fn static_disk() -> Scenario {
    let r = TimeFunction::constant(1.0);
    let domain = ellipse_domain(
        TimeFunction::constant(0.0),
        TimeFunction::constant(0.0),
        r.clone(),
        r.clone(),
        2.0,
    );
    Scenario::new("static-disk", "unit disk in R², not moving", domain, (-1.0, 1.0))
        .with_fields(disk_fields(r))
        .with_divergence_fields(fields::flat_divergence_fields(2))
}

/// Radius of the shrinking disk, `1 - t/10`.
pub fn shrinking_radius() -> TimeFunction {
    TimeFunction::linear(1.0, -0.1)
}

/// The shrinking circle reparametrized by `ζ ↦ ζ + 0.3 sin ζ` with a
/// tangential drift `0.2 t` along the circle.
pub fn drifting_circle(r: TimeFunction) -> BoundaryImmersion {
    let angle = |t: f64, z: f64| z + 0.3 * z.sin() + 0.2 * t;
    let (r1, r2, r3) = (r.clone(), r.clone(), r);
    BoundaryImmersion::new(
        vec![ParamBox::new(vec![0.0], vec![TAU]).with_periodic(0)],
        Arc::new(move |t, _, z| {
            let h = angle(t, z[0]);
            DVector::from_vec(vec![r1.at(t) * h.cos(), r1.at(t) * h.sin()])
        }),
    )
    .with_time_derivative(Arc::new(move |t, _, z| {
        let h = angle(t, z[0]);
        let (r, dr) = (r2.at(t), r2.rate(t));
        DVector::from_vec(vec![
            dr * h.cos() - 0.2 * r * h.sin(),
            dr * h.sin() + 0.2 * r * h.cos(),
        ])
    }))
    .with_space_jacobian(Arc::new(move |t, _, z| {
        let h = angle(t, z[0]);
        let k = r3.at(t) * (1.0 + 0.3 * z[0].cos());
        DMatrix::from_column_slice(2, 1, &[-k * h.sin(), k * h.cos()])
    }))
}

fn shrinking_disk() -> Scenario {
    let r = shrinking_radius();
    let domain = ellipse_domain(
        TimeFunction::constant(0.0),
        TimeFunction::constant(0.0),
        r.clone(),
        r.clone(),
        2.0,
    );
    let mut s = Scenario::new(
        "shrinking-disk",
        "disk of radius 1 - t/10 centred at the origin",
        domain,
        (-1.0, 2.0),
    )
    .with_checkpoints(&[0.0])
    .with_fields(disk_fields(r.clone()))
    .with_divergence_fields(fields::flat_divergence_fields(2));
    s.alternate_boundary = Some(drifting_circle(r).with_delta_time(s.domain.boundary.delta_time));
    s
}

fn translating_ellipse() -> Scenario {
    let a = TimeFunction::linear(1.2, 0.1);
    let b = TimeFunction::linear(0.7, -0.05);
    let domain = ellipse_domain(
        TimeFunction::linear(0.0, 0.3),
        TimeFunction::quadratic(0.0, 0.0, 0.1),
        a.clone(),
        b.clone(),
        3.0,
    );
    let (a1, b1) = (a.clone(), b.clone());
    Scenario::new(
        "translating-ellipse",
        "ellipse translating along (0.3 t, 0.1 t²) while its axes breathe",
        domain,
        (-1.0, 1.0),
    )
    .with_fields(vec![
        NamedField::library("one").with_reference(
            Arc::new(move |t| PI * a1.at(t) * b1.at(t)),
            Arc::new(move |t| PI * (a.rate(t) * b.at(t) + a.at(t) * b.rate(t))),
        ),
        NamedField::library("one-plus-x2"),
        NamedField::library("pulse"),
    ])
    .with_divergence_fields(fields::flat_divergence_fields(2))
}

// ---------------------------------------------------------------------------
// balls in R³

fn sphere_point(theta: f64, psi: f64) -> DVector<f64> {
    DVector::from_vec(vec![
        theta.sin() * psi.cos(),
        theta.sin() * psi.sin(),
        theta.cos(),
    ])
}

fn sphere_d_theta(theta: f64, psi: f64) -> DVector<f64> {
    DVector::from_vec(vec![
        theta.cos() * psi.cos(),
        theta.cos() * psi.sin(),
        -theta.sin(),
    ])
}

fn sphere_d_psi(theta: f64, psi: f64) -> DVector<f64> {
    DVector::from_vec(vec![-theta.sin() * psi.sin(), theta.sin() * psi.cos(), 0.0])
}

fn sphere_box() -> ParamBox {
    ParamBox::new(vec![0.0, 0.0], vec![PI, TAU]).with_periodic(1)
}

/// Ball of radius `r(t)` about the origin of `R³`.
pub fn ball_domain(r: TimeFunction) -> EvolvingDomain {
    let manifold = ManifoldChart::euclidean(vec![-3.0; 3], vec![3.0; 3]);
    let (r1, r2, r3) = (r.clone(), r.clone(), r.clone());
    let boundary = BoundaryImmersion::new(
        vec![sphere_box()],
        Arc::new(move |t, _, z| sphere_point(z[0], z[1]) * r1.at(t)),
    )
    .with_time_derivative(Arc::new(move |t, _, z| sphere_point(z[0], z[1]) * r2.rate(t)))
    .with_space_jacobian(Arc::new(move |t, _, z| {
        DMatrix::from_columns(&[sphere_d_theta(z[0], z[1]), sphere_d_psi(z[0], z[1])]) * r3.at(t)
    }));

    let (r4, r5, r6) = (r.clone(), r.clone(), r.clone());
    let bulk = BulkPiece::new(
        ParamBox::new(vec![0.0, 0.0, 0.0], vec![1.0, PI, TAU]).with_periodic(2),
        Arc::new(move |t, u| sphere_point(u[1], u[2]) * (u[0] * r4.at(t))),
    )
    .with_jacobian(Arc::new(move |t, u| {
        let r = r5.at(t);
        DMatrix::from_columns(&[
            sphere_point(u[1], u[2]) * r,
            sphere_d_theta(u[1], u[2]) * (u[0] * r),
            sphere_d_psi(u[1], u[2]) * (u[0] * r),
        ])
    }))
    .with_time_derivative(Arc::new(move |t, u| sphere_point(u[1], u[2]) * (u[0] * r6.rate(t))));

    EvolvingDomain::new(manifold, boundary)
        .with_bulk(vec![bulk])
        .with_membership(Arc::new(move |t, x| x.norm() < r.at(t)))
}

fn ball_fields(r: TimeFunction) -> Vec<NamedField> {
    let (r1, r2, r3, r4, r5, r6) = (r.clone(), r.clone(), r.clone(), r.clone(), r.clone(), r);
    vec![
        NamedField::library("one").with_reference(
            Arc::new(move |t| 4.0 * PI * r1.at(t).powi(3) / 3.0),
            Arc::new(move |t| 4.0 * PI * r2.at(t).powi(2) * r2.rate(t)),
        ),
        NamedField::library("x2").with_reference(
            Arc::new(move |t| 4.0 * PI * r3.at(t).powi(5) / 15.0),
            Arc::new(move |t| 4.0 * PI * r4.at(t).powi(4) * r4.rate(t) / 3.0),
        ),
        NamedField::library("r2").with_reference(
            Arc::new(move |t| 4.0 * PI * r5.at(t).powi(5) / 5.0),
            Arc::new(move |t| 4.0 * PI * r6.at(t).powi(4) * r6.rate(t)),
        ),
        NamedField::library("pulse"),
    ]
}

fn expanding_ball() -> Scenario {
    let r = TimeFunction::linear(1.0, 1.0);
    Scenario::new(
        "expanding-ball",
        "ball of radius 1 + t in R³ (Reynolds transport with v·n = 1)",
        ball_domain(r.clone()),
        (-0.5, 0.5),
    )
    .with_checkpoints(&[0.0])
    .with_fields(ball_fields(r))
    .with_divergence_fields(fields::flat_divergence_fields(3))
}

fn static_ball() -> Scenario {
    let r = TimeFunction::constant(1.0);
    let mut fields = ball_fields(r);
    let vol = 4.0 * PI / 3.0 + 4.0 * PI / 15.0;
    fields.push(
        NamedField::library("linear-in-time")
            .with_reference(Arc::new(move |t| t * vol), Arc::new(move |_| vol)),
    );
    Scenario::new("static-ball", "unit ball in R³, not moving", ball_domain(TimeFunction::constant(1.0)), (-1.0, 1.0))
        .with_fields(fields)
        .with_divergence_fields(fields::flat_divergence_fields(3))
}

// ---------------------------------------------------------------------------
// curved ambient manifolds

/// The unit sphere in `R³` in polar/azimuth coordinates.
pub fn unit_sphere_chart() -> ManifoldChart {
    ManifoldChart::new(sphere_box(), 3, Arc::new(|u: &[f64]| sphere_point(u[0], u[1])))
        .with_jacobian(Arc::new(|u: &[f64]| {
            DMatrix::from_columns(&[sphere_d_theta(u[0], u[1]), sphere_d_psi(u[0], u[1])])
        }))
        .with_closest_param(Arc::new(|x: &[f64]| {
            let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            let theta = (x[2] / r).clamp(-1.0, 1.0).acos();
            let psi = x[1].atan2(x[0]).rem_euclid(TAU);
            DVector::from_vec(vec![theta, psi])
        }))
}

/// Polar cap `{polar angle < θ₀(t)}` on the unit sphere.
pub fn cap_domain(theta0: TimeFunction) -> EvolvingDomain {
    let (c1, c2, c3) = (theta0.clone(), theta0.clone(), theta0.clone());
    let boundary = BoundaryImmersion::new(
        vec![ParamBox::new(vec![0.0], vec![TAU]).with_periodic(0)],
        Arc::new(move |t, _, z| sphere_point(c1.at(t), z[0])),
    )
    .with_time_derivative(Arc::new(move |t, _, z| sphere_d_theta(c2.at(t), z[0]) * c2.rate(t)))
    .with_space_jacobian(Arc::new(move |t, _, z| {
        DMatrix::from_columns(&[sphere_d_psi(c3.at(t), z[0])])
    }));

    let (c4, c5, c6) = (theta0.clone(), theta0.clone(), theta0.clone());
    let bulk = BulkPiece::new(
        ParamBox::new(vec![0.0, 0.0], vec![1.0, TAU]).with_periodic(1),
        Arc::new(move |t, u| sphere_point(u[0] * c4.at(t), u[1])),
    )
    .with_jacobian(Arc::new(move |t, u| {
        let th = c5.at(t);
        DMatrix::from_columns(&[
            sphere_d_theta(u[0] * th, u[1]) * th,
            sphere_d_psi(u[0] * th, u[1]),
        ])
    }))
    .with_time_derivative(Arc::new(move |t, u| {
        sphere_d_theta(u[0] * c6.at(t), u[1]) * (u[0] * c6.rate(t))
    }));

    EvolvingDomain::new(unit_sphere_chart(), boundary)
        .with_bulk(vec![bulk])
        .with_membership(Arc::new(move |t, x| x[2] / x.norm() > theta0.at(t).cos()))
}

fn spherical_cap() -> Scenario {
    let theta0 = TimeFunction::linear(FRAC_PI_4, 0.1);
    let (c1, c2) = (theta0.clone(), theta0.clone());
    Scenario::new(
        "spherical-cap",
        "polar cap of the unit sphere with edge at polar angle π/4 + t/10",
        cap_domain(theta0),
        (-1.0, 1.0),
    )
    .with_checkpoints(&[0.0])
    .with_fields(vec![
        NamedField::library("one").with_reference(
            Arc::new(move |t| TAU * (1.0 - c1.at(t).cos())),
            Arc::new(move |t| TAU * c2.at(t).sin() * c2.rate(t)),
        ),
        NamedField::library("height"),
        NamedField::library("pulse"),
    ])
    .with_divergence_fields(fields::sphere_divergence_fields())
}

const TORUS_MAJOR: f64 = 2.0;
const TORUS_MINOR: f64 = 0.5;
const PATCH_CENTER: [f64; 2] = [PI, PI];

fn torus_point(alpha: f64, beta: f64) -> DVector<f64> {
    let ring = TORUS_MAJOR + TORUS_MINOR * beta.cos();
    DVector::from_vec(vec![ring * alpha.cos(), ring * alpha.sin(), TORUS_MINOR * beta.sin()])
}

fn torus_differential(alpha: f64, beta: f64) -> DMatrix<f64> {
    let ring = TORUS_MAJOR + TORUS_MINOR * beta.cos();
    DMatrix::from_row_slice(
        3,
        2,
        &[
            -ring * alpha.sin(),
            -TORUS_MINOR * beta.sin() * alpha.cos(),
            ring * alpha.cos(),
            -TORUS_MINOR * beta.sin() * alpha.sin(),
            0.0,
            TORUS_MINOR * beta.cos(),
        ],
    )
}

/// Torus of revolution about the `z` axis, major radius 2, minor radius 1/2.
pub fn torus_chart() -> ManifoldChart {
    let b = ParamBox::new(vec![0.0, 0.0], vec![TAU, TAU])
        .with_periodic(0)
        .with_periodic(1);
    ManifoldChart::new(b, 3, Arc::new(|u: &[f64]| torus_point(u[0], u[1])))
        .with_jacobian(Arc::new(|u: &[f64]| torus_differential(u[0], u[1])))
        .with_closest_param(Arc::new(|x: &[f64]| {
            let alpha = x[1].atan2(x[0]).rem_euclid(TAU);
            let rho = x[0].hypot(x[1]);
            let beta = x[2].atan2(rho - TORUS_MAJOR).rem_euclid(TAU);
            DVector::from_vec(vec![alpha, beta])
        }))
}

/// Patch radius in chart coordinates, `0.6 (1 + 0.2 sin t cos 3ψ)`, with its
/// partial derivatives in `t` and `ψ`.
fn patch_radius(t: f64, psi: f64) -> (f64, f64, f64) {
    let r = 0.6 * (1.0 + 0.2 * t.sin() * (3.0 * psi).cos());
    let r_t = 0.12 * t.cos() * (3.0 * psi).cos();
    let r_psi = -0.36 * t.sin() * (3.0 * psi).sin();
    (r, r_t, r_psi)
}

fn torus_patch() -> Scenario {
    let chart_coords = |rho: f64, r: f64, psi: f64| {
        (
            PATCH_CENTER[0] + rho * r * psi.cos(),
            PATCH_CENTER[1] + rho * r * psi.sin(),
        )
    };
    let boundary = BoundaryImmersion::new(
        vec![ParamBox::new(vec![0.0], vec![TAU]).with_periodic(0)],
        Arc::new(move |t, _, z| {
            let (r, _, _) = patch_radius(t, z[0]);
            let (a, b) = chart_coords(1.0, r, z[0]);
            torus_point(a, b)
        }),
    )
    .with_time_derivative(Arc::new(move |t, _, z| {
        let (r, r_t, _) = patch_radius(t, z[0]);
        let (a, b) = chart_coords(1.0, r, z[0]);
        torus_differential(a, b) * DVector::from_vec(vec![r_t * z[0].cos(), r_t * z[0].sin()])
    }))
    .with_space_jacobian(Arc::new(move |t, _, z| {
        let psi = z[0];
        let (r, _, r_psi) = patch_radius(t, psi);
        let (a, b) = chart_coords(1.0, r, psi);
        let q_psi = DVector::from_vec(vec![
            r_psi * psi.cos() - r * psi.sin(),
            r_psi * psi.sin() + r * psi.cos(),
        ]);
        torus_differential(a, b) * DMatrix::from_columns(&[q_psi])
    }));

    let bulk = BulkPiece::new(
        ParamBox::new(vec![0.0, 0.0], vec![1.0, TAU]).with_periodic(1),
        Arc::new(move |t, u| {
            let (r, _, _) = patch_radius(t, u[1]);
            let (a, b) = chart_coords(u[0], r, u[1]);
            torus_point(a, b)
        }),
    )
    .with_jacobian(Arc::new(move |t, u| {
        let (rho, psi) = (u[0], u[1]);
        let (r, _, r_psi) = patch_radius(t, psi);
        let (a, b) = chart_coords(rho, r, psi);
        let inner = DMatrix::from_row_slice(
            2,
            2,
            &[
                r * psi.cos(),
                rho * (r_psi * psi.cos() - r * psi.sin()),
                r * psi.sin(),
                rho * (r_psi * psi.sin() + r * psi.cos()),
            ],
        );
        torus_differential(a, b) * inner
    }))
    .with_time_derivative(Arc::new(move |t, u| {
        let (rho, psi) = (u[0], u[1]);
        let (r, r_t, _) = patch_radius(t, psi);
        let (a, b) = chart_coords(rho, r, psi);
        torus_differential(a, b) * DVector::from_vec(vec![rho * r_t * psi.cos(), rho * r_t * psi.sin()])
    }));

    let chart = torus_chart();
    let probe = chart.clone();
    let domain = EvolvingDomain::new(chart, boundary)
        .with_bulk(vec![bulk])
        .with_membership(Arc::new(move |t, x| {
            let Ok(u) = probe.closest_param(x) else {
                return false;
            };
            let (da, db) = (u[0] - PATCH_CENTER[0], u[1] - PATCH_CENTER[1]);
            let (r, _, _) = patch_radius(t, db.atan2(da));
            da.hypot(db) < r
        }));
    Scenario::new(
        "torus-patch",
        "star-shaped patch on a torus whose edge oscillates as 0.6 (1 + 0.2 sin t cos 3ψ)",
        domain,
        (-1.0, 1.0),
    )
    .with_fields(vec![
        NamedField::library("one"),
        NamedField::library("pulse"),
        NamedField::library("height"),
    ])
    .with_divergence_fields(fields::torus_divergence_fields())
}

// ---------------------------------------------------------------------------
// the self-intersecting figure-eight

/// The curve `(sin θ, ½ sin 2θ + t cos θ)`.
pub fn figure_eight_point(t: f64, theta: f64) -> [f64; 2] {
    [theta.sin(), 0.5 * (2.0 * theta).sin() + t * theta.cos()]
}

/// Parameter range `[θ_start, θ_end]` of each lobe and its time derivative.
/// The lobes meet at the crossing point `(-t, 0)`.
fn lobe_range(t: f64, lobe: usize) -> ([f64; 2], [f64; 2]) {
    let s = t.asin();
    let ds = 1.0 / (1.0 - t * t).sqrt();
    match lobe {
        0 => ([-s, PI + s], [-ds, ds]),
        _ => ([PI + s, TAU - s], [ds, -ds]),
    }
}

/// Whether `(x, y)` is enclosed by the figure-eight at time `t`. Writing the
/// curve as `y = cos θ (x + t)` with `x = sin θ` gives the two branches
/// `y = ±√(1-x²)(x + t)`, and the enclosed set lies between them.
pub fn inside_figure_eight(t: f64, x: f64, y: f64) -> bool {
    x.abs() < 1.0 && y.abs() < (1.0 - x * x).sqrt() * (x + t).abs()
}

/// `O_t = {|y| < √(1-x²) |x + t|}`, bounded by the figure-eight, split into
/// the two lobes either side of the crossing `x = -t`.
pub fn figure_eight_domain() -> EvolvingDomain {
    let manifold = ManifoldChart::euclidean(vec![-1.5, -1.5], vec![1.5, 1.5]);
    let lobe_box = ParamBox::new(vec![0.0], vec![1.0]);
    let theta_of = |t: f64, c: usize, s: f64| {
        let (r, dr) = lobe_range(t, c);
        (r[0] + s * (r[1] - r[0]), r[1] - r[0], dr[0] + s * (dr[1] - dr[0]))
    };
    let boundary = BoundaryImmersion::new(
        vec![lobe_box.clone(), lobe_box],
        Arc::new(move |t, c, z| {
            let (th, _, _) = theta_of(t, c, z[0]);
            DVector::from_column_slice(&figure_eight_point(t, th))
        }),
    )
    .with_time_derivative(Arc::new(move |t, c, z| {
        let (th, _, th_t) = theta_of(t, c, z[0]);
        let d_theta = [th.cos(), (2.0 * th).cos() - t * th.sin()];
        DVector::from_vec(vec![d_theta[0] * th_t, th.cos() + d_theta[1] * th_t])
    }))
    .with_space_jacobian(Arc::new(move |t, c, z| {
        let (th, span, _) = theta_of(t, c, z[0]);
        DMatrix::from_column_slice(
            2,
            1,
            &[th.cos() * span, ((2.0 * th).cos() - t * th.sin()) * span],
        )
    }));

    // α ranges over either side of the crossing α* = -asin t, with x = sin α
    let alpha_range = |t: f64, piece: usize| {
        let a = -t.asin();
        let da = -1.0 / (1.0 - t * t).sqrt();
        match piece {
            0 => ([a, FRAC_PI_2], [da, 0.0]),
            _ => ([-FRAC_PI_2, a], [0.0, da]),
        }
    };
    let pieces = (0..2)
        .map(|piece| {
            let sheet = ParamBox::new(vec![0.0, -1.0], vec![1.0, 1.0]);
            BulkPiece::new(
                sheet,
                Arc::new(move |t, u| {
                    let (r, _) = alpha_range(t, piece);
                    let al = r[0] + u[0] * (r[1] - r[0]);
                    DVector::from_vec(vec![al.sin(), u[1] * al.cos() * (al.sin() + t)])
                }),
            )
            .with_jacobian(Arc::new(move |t, u| {
                let (r, _) = alpha_range(t, piece);
                let span = r[1] - r[0];
                let al = r[0] + u[0] * (r[1] - r[0]);
                let y_alpha = u[1] * ((2.0 * al).cos() - t * al.sin());
                DMatrix::from_row_slice(
                    2,
                    2,
                    &[al.cos() * span, 0.0, y_alpha * span, al.cos() * (al.sin() + t)],
                )
            }))
            .with_time_derivative(Arc::new(move |t, u| {
                let (r, dr) = alpha_range(t, piece);
                let al = r[0] + u[0] * (r[1] - r[0]);
                let al_t = dr[0] + u[0] * (dr[1] - dr[0]);
                let y_alpha = u[1] * ((2.0 * al).cos() - t * al.sin());
                DVector::from_vec(vec![al.cos() * al_t, y_alpha * al_t + u[1] * al.cos()])
            }))
        })
        .collect();

    EvolvingDomain::new(manifold, boundary)
        .with_bulk(pieces)
        .with_membership(Arc::new(|t, x| inside_figure_eight(t, x[0], x[1])))
        .with_exceptional_points(Arc::new(|t| vec![DVector::from_vec(vec![-t, 0.0])]))
}

/// Area enclosed by the figure-eight: `4/3 (1-t²)^{3/2} + 2t (t√(1-t²) + asin t)`.
pub fn figure_eight_area(t: f64) -> f64 {
    let c = (1.0 - t * t).sqrt();
    4.0 / 3.0 * c.powi(3) + 2.0 * t * (t * c + t.asin())
}

pub fn figure_eight_area_rate(t: f64) -> f64 {
    2.0 * t.asin() + 2.0 * t * (1.0 - t * t).sqrt()
}

fn figure_eight() -> Scenario {
    let mut s = Scenario::new(
        "figure-eight",
        "region bounded by (sin θ, ½ sin 2θ + t cos θ), self-intersecting at (-t, 0)",
        figure_eight_domain(),
        (-0.5, 0.75),
    )
    .with_checkpoints(&[0.0, 0.25, 0.5])
    .with_fields(vec![
        NamedField::library("one").with_reference(
            Arc::new(figure_eight_area),
            Arc::new(figure_eight_area_rate),
        ),
        NamedField::library("one-plus-x2"),
        NamedField::library("pulse"),
    ])
    .with_divergence_fields(fields::flat_divergence_fields(2));
    s.smooth = false;
    s
}

/// Looks up a divergence-test field of a scenario by name.
pub fn divergence_field<'a>(scenario: &'a Scenario, name: &str) -> Result<&'a SpaceTimeField> {
    scenario
        .divergence_fields
        .iter()
        .find(|(n, _)| n == name)
        .map(|(_, a)| a)
        .ok_or_else(|| TransportError::UnknownField {
            scenario: scenario.name.clone(),
            field: name.to_string(),
        })
}
