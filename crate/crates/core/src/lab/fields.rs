//! Library of analytic scalar fields and space-time vector fields used by
//! the scenario registry. Every entry carries its exact time partial and
//! ambient gradient.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::domain::ScalarField;
use crate::spacetime::SpaceTimeField;

fn unit(d: usize, i: usize) -> DVector<f64> {
    let mut e = DVector::zeros(d);
    e[i] = 1.0;
    e
}

/// `φ ≡ 1`
pub fn one() -> ScalarField {
    ScalarField::constant(1.0)
}

/// `φ = x₀`
pub fn first_coordinate() -> ScalarField {
    ScalarField::new(Arc::new(|_, x: &DVector<f64>| x[0]))
        .with_time_partial(Arc::new(|_, _| 0.0))
        .with_gradient(Arc::new(|_, x: &DVector<f64>| unit(x.len(), 0)))
}

/// `φ = x₀²`
pub fn first_squared() -> ScalarField {
    ScalarField::new(Arc::new(|_, x: &DVector<f64>| x[0] * x[0]))
        .with_time_partial(Arc::new(|_, _| 0.0))
        .with_gradient(Arc::new(|_, x: &DVector<f64>| unit(x.len(), 0) * (2.0 * x[0])))
}

/// `φ = 1 + x₀²`
pub fn one_plus_first_squared() -> ScalarField {
    ScalarField::new(Arc::new(|_, x: &DVector<f64>| 1.0 + x[0] * x[0]))
        .with_time_partial(Arc::new(|_, _| 0.0))
        .with_gradient(Arc::new(|_, x: &DVector<f64>| unit(x.len(), 0) * (2.0 * x[0])))
}

/// `φ = |x|²`
pub fn radius_squared() -> ScalarField {
    ScalarField::new(Arc::new(|_, x: &DVector<f64>| x.norm_squared()))
        .with_time_partial(Arc::new(|_, _| 0.0))
        .with_gradient(Arc::new(|_, x: &DVector<f64>| x * 2.0))
}

/// `φ = (1 + x₀²) cos t`
pub fn wave() -> ScalarField {
    ScalarField::new(Arc::new(|t: f64, x: &DVector<f64>| (1.0 + x[0] * x[0]) * t.cos()))
        .with_time_partial(Arc::new(|t: f64, x: &DVector<f64>| -(1.0 + x[0] * x[0]) * t.sin()))
        .with_gradient(Arc::new(|t: f64, x: &DVector<f64>| {
            unit(x.len(), 0) * (2.0 * x[0] * t.cos())
        }))
}

/// `φ = exp(-|x|²/2) (1 + ½ sin(2t + x₀))`
pub fn pulse() -> ScalarField {
    ScalarField::new(Arc::new(|t: f64, x: &DVector<f64>| {
        (-0.5 * x.norm_squared()).exp() * (1.0 + 0.5 * (2.0 * t + x[0]).sin())
    }))
    .with_time_partial(Arc::new(|t: f64, x: &DVector<f64>| {
        (-0.5 * x.norm_squared()).exp() * (2.0 * t + x[0]).cos()
    }))
    .with_gradient(Arc::new(|t: f64, x: &DVector<f64>| {
        let g = (-0.5 * x.norm_squared()).exp();
        let s = 1.0 + 0.5 * (2.0 * t + x[0]).sin();
        let mut grad = x * (-g * s);
        grad[0] += g * 0.5 * (2.0 * t + x[0]).cos();
        grad
    }))
}

/// `φ = t (1 + x₀²)`
pub fn linear_in_time() -> ScalarField {
    ScalarField::new(Arc::new(|t: f64, x: &DVector<f64>| t * (1.0 + x[0] * x[0])))
        .with_time_partial(Arc::new(|_, x: &DVector<f64>| 1.0 + x[0] * x[0]))
        .with_gradient(Arc::new(|t: f64, x: &DVector<f64>| unit(x.len(), 0) * (2.0 * t * x[0])))
}

/// `φ = 2 + x_{d-1} + ½ sin t`, the height above the equatorial plane.
pub fn height() -> ScalarField {
    ScalarField::new(Arc::new(|t: f64, x: &DVector<f64>| 2.0 + x[x.len() - 1] + 0.5 * t.sin()))
        .with_time_partial(Arc::new(|t: f64, _| 0.5 * t.cos()))
        .with_gradient(Arc::new(|_, x: &DVector<f64>| unit(x.len(), x.len() - 1)))
}

/// Looks a scalar field up by name.
pub fn by_name(name: &str) -> Option<ScalarField> {
    Some(match name {
        "one" => one(),
        "x" => first_coordinate(),
        "x2" => first_squared(),
        "one-plus-x2" => one_plus_first_squared(),
        "r2" => radius_squared(),
        "wave" => wave(),
        "pulse" => pulse(),
        "linear-in-time" => linear_in_time(),
        "height" => height(),
        _ => return None,
    })
}

/// Rotation about the last ambient axis, `(0, -x₁, x₀, 0, …)`; tangent to
/// every surface of revolution about that axis.
pub fn rotation(d: usize) -> SpaceTimeField {
    let mut a = DMatrix::zeros(d, d);
    a[(0, 1)] = -1.0;
    a[(1, 0)] = 1.0;
    SpaceTimeField::spatial_affine(a, DVector::zeros(d))
}

/// `(0, (1 + s/2) P e_z)` on the unit sphere, where `P e_z = e_z - z x` is the
/// tangential part of the vertical direction.
pub fn sphere_vertical_tangent() -> SpaceTimeField {
    SpaceTimeField::new(
        Arc::new(|s: f64, x: &DVector<f64>| {
            let k = 1.0 + 0.5 * s;
            let z = x[2];
            DVector::from_vec(vec![0.0, -k * z * x[0], -k * z * x[1], k * (1.0 - z * z)])
        }),
        Arc::new(|s: f64, x: &DVector<f64>| {
            let k = 1.0 + 0.5 * s;
            let (px, py, z) = (x[0], x[1], x[2]);
            let mut j = DMatrix::zeros(4, 4);
            j[(1, 0)] = -0.5 * z * px;
            j[(2, 0)] = -0.5 * z * py;
            j[(3, 0)] = 0.5 * (1.0 - z * z);
            j[(1, 1)] = -k * z;
            j[(1, 3)] = -k * px;
            j[(2, 2)] = -k * z;
            j[(2, 3)] = -k * py;
            j[(3, 3)] = -2.0 * k * z;
            j
        }),
    )
}

/// Three divergence-test fields for a flat `R^d`: a constant, `φ t̂` with the
/// pulse field, and a spatial affine field.
pub fn flat_divergence_fields(d: usize) -> Vec<(String, SpaceTimeField)> {
    let constant: Vec<f64> = (0..=d).map(|i| [0.3, 1.0, -0.5, 0.25][i]).collect();
    let mut a = DMatrix::zeros(d, d);
    let mut b = DVector::zeros(d);
    for i in 0..d {
        for j in 0..d {
            a[(i, j)] = if i == j { 1.0 + i as f64 } else { 0.5 - 0.3 * (i + 2 * j) as f64 };
        }
        b[i] = 0.1 * (i as f64 + 1.0);
    }
    vec![
        ("constant".into(), SpaceTimeField::constant(constant)),
        (
            "pulse-timelike".into(),
            SpaceTimeField::time_like(pulse()).expect("pulse has analytic derivatives"),
        ),
        ("affine".into(), SpaceTimeField::spatial_affine(a, b)),
    ]
}

pub fn sphere_divergence_fields() -> Vec<(String, SpaceTimeField)> {
    vec![
        (
            "height-timelike".into(),
            SpaceTimeField::time_like(height()).expect("analytic"),
        ),
        ("rotation".into(), rotation(3)),
        ("vertical-tangent".into(), sphere_vertical_tangent()),
    ]
}

pub fn torus_divergence_fields() -> Vec<(String, SpaceTimeField)> {
    vec![
        (
            "pulse-timelike".into(),
            SpaceTimeField::time_like(pulse()).expect("analytic"),
        ),
        ("rotation".into(), rotation(3)),
        (
            "wave-timelike".into(),
            SpaceTimeField::time_like(wave()).expect("analytic"),
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    const NAMES: [&str; 9] = [
        "one",
        "x",
        "x2",
        "one-plus-x2",
        "r2",
        "wave",
        "pulse",
        "linear-in-time",
        "height",
    ];

    #[test]
    fn analytic_derivatives_match_differences() {
        let x = DVector::from_vec(vec![0.3, -0.7, 0.4]);
        let t = 0.37;
        let h = 1e-5;
        for name in NAMES {
            let f = by_name(name).unwrap();
            let fd = f.fd_time_partial(t, &x, h);
            assert!((f.time_partial(t, &x).unwrap() - fd).abs() < 1e-8, "{name}");
            let g = f.gradient(t, &x).unwrap().unwrap();
            for i in 0..3 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let d = (f.value(t, &xp).unwrap() - f.value(t, &xm).unwrap()) / (2.0 * h);
                assert!((g[i] - d).abs() < 1e-8, "{name} axis {i}");
            }
        }
    }

    #[test]
    fn vector_field_jacobians_match_differences() {
        let x = DVector::from_vec(vec![0.48, -0.6, 0.64]);
        let s = 0.2;
        let h = 1e-6;
        let mut fields = sphere_divergence_fields();
        fields.extend(flat_divergence_fields(3));
        for (name, a) in fields {
            let j = a.jacobian(s, &x).unwrap();
            let ds = (a.value(s + h, &x).unwrap() - a.value(s - h, &x).unwrap()) / (2.0 * h);
            assert!((j.column(0) - ds).norm() < 1e-8, "{name} time column");
            for i in 0..3 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let d = (a.value(s, &xp).unwrap() - a.value(s, &xm).unwrap()) / (2.0 * h);
                assert!((j.column(i + 1) - d).norm() < 1e-8, "{name} column {i}");
            }
        }
    }
}
