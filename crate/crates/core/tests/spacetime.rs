use std::f64::consts::{FRAC_PI_4, PI, TAU};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use evolve_transport::domain::ScalarField;
use evolve_transport::geometry;
use evolve_transport::lab::{self, scenarios};
use evolve_transport::quadrature::QuadratureRule;
use evolve_transport::spacetime::{self, SpaceTimeField};
use evolve_transport::TransportError;

fn close(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol * (1.0 + b.abs()), "{a} vs {b} (tol {tol})");
}

fn time_only() -> ScalarField {
    ScalarField::new(Arc::new(|s, _| s))
        .with_time_partial(Arc::new(|_, _| 1.0))
        .with_gradient(Arc::new(|_, x: &DVector<f64>| DVector::zeros(x.len())))
}

#[test]
fn spacetime_immersion_examples() {
    let s = lab::scenario("static-interval").unwrap();
    let p = s.domain.boundary.point(0.5, 1, &[]).unwrap();
    let f = spacetime::spacetime_immersion(&s.domain, 0.5, 1, &[]).unwrap();
    assert_eq!(f.as_slice(), &[0.5, p[0]]);

    let s = lab::scenario("shrinking-disk").unwrap();
    let f = spacetime::spacetime_immersion(&s.domain, 1.0, 0, &[0.0]).unwrap();
    assert!((f - DVector::from_vec(vec![1.0, 0.9, 0.0])).norm() < 1e-15);

    let s = lab::scenario("leibniz-interval").unwrap();
    let f = spacetime::spacetime_immersion(&s.domain, 1.0, 1, &[]).unwrap();
    assert_eq!(f.as_slice(), &[1.0, 3.0]);
}

#[test]
fn lateral_normal_examples() {
    let s = lab::scenario("static-disk").unwrap();
    let w = spacetime::lateral_normal(&s.domain, 0.0, 0, &[0.7]).unwrap();
    let n = geometry::exterior_unit_normal(&s.domain, 0.0, 0, &[0.7]).unwrap();
    assert_eq!(w[0], 0.0);
    assert!((w.rows(1, 2) - n).norm() < 1e-15);

    let s = lab::scenario("shrinking-disk").unwrap();
    let w = spacetime::lateral_normal(&s.domain, 0.0, 0, &[0.0]).unwrap();
    let expected = DVector::from_vec(vec![0.1, 1.0, 0.0]) / 1.01f64.sqrt();
    assert!((&w - expected).norm() < 1e-12, "{w}");
    assert!((w[0] - 0.0995037).abs() < 1e-7 && (w[1] - 0.9950372).abs() < 1e-7);

    let s = lab::scenario("leibniz-interval").unwrap();
    let w = spacetime::lateral_normal(&s.domain, 1.0, 1, &[]).unwrap();
    let expected = DVector::from_vec(vec![-2.0, 1.0]) / 5f64.sqrt();
    assert!((&w - expected).norm() < 1e-12, "{w}");
}

#[test]
fn lateral_normal_satisfies_its_characterization() {
    for sc in lab::registry() {
        let d = &sc.domain;
        for s in sc.interior_times(4) {
            for (c, chart) in d.boundary.charts.iter().enumerate() {
                for k in 0..9 {
                    let z = chart.from_unit(&vec![(k as f64 + 0.29) / 9.0; chart.dim()]);
                    let g = geometry::boundary_geometry(d, s, c, &z).unwrap();
                    if d.distance_to_exceptional(s, &g.point) < 1e-2 {
                        continue;
                    }
                    let w = spacetime::lateral_normal_from(&g);
                    let dim = g.point.len();
                    // tangent to W: orthogonal to (1, V n)
                    let mut along = DVector::zeros(dim + 1);
                    along[0] = 1.0;
                    along.rows_mut(1, dim).copy_from(&(&g.normal * g.normal_velocity));
                    assert!((w.norm() - 1.0).abs() < 1e-10, "{}", sc.name);
                    assert!(w.dot(&along).abs() < 1e-8, "{}", sc.name);
                    assert!(w.rows(1, dim).dot(&g.normal) > 0.0, "{}", sc.name);
                    for tau in g.tangents.column_iter() {
                        assert!(w.rows(1, dim).dot(&tau).abs() < 1e-8 * tau.norm(), "{}", sc.name);
                    }
                    let check = spacetime::check_lateral_normal(&g);
                    assert!(check.unit_defect < 1e-10 && check.tangency_residual < 1e-8);
                    assert!(check.normal_alignment > 0.0 && check.frame_residual < 1e-8);
                }
            }
        }
    }
}

#[test]
fn jacobian_examples() {
    let s = lab::scenario("static-disk").unwrap();
    let j = spacetime::spacetime_jacobian(&s.domain, 0.0, 0, &[1.1]).unwrap();
    close(j.direct, 1.0, 1e-14);
    close(j.factored, 1.0, 1e-14);

    let s = lab::scenario("shrinking-disk").unwrap();
    for z in [0.0, 1.0, 4.0] {
        let j = spacetime::spacetime_jacobian(&s.domain, 0.0, 0, &[z]).unwrap();
        close(j.direct, 1.01f64.sqrt(), 1e-13);
        close(j.factored, 1.004987562, 1e-9);
    }

    let s = lab::scenario("spherical-cap").unwrap();
    let j = spacetime::spacetime_jacobian(&s.domain, 0.0, 0, &[0.4]).unwrap();
    close(j.direct, FRAC_PI_4.sin() * 1.01f64.sqrt(), 1e-13);
    close(j.factored, FRAC_PI_4.sin() * 1.01f64.sqrt(), 1e-13);
}

#[test]
fn direct_jacobian_is_the_full_gram_determinant() {
    // oracle: √det(dFᵀ dF) assembled here from the ellipse's own formulas
    let s = lab::scenario("translating-ellipse").unwrap();
    let (t, th) = (0.3f64, 0.8f64);
    let (a, b) = (1.2 + 0.1 * t, 0.7 - 0.05 * t);
    let df = DMatrix::from_row_slice(
        3,
        2,
        &[1.0, 0.0, 0.3 + 0.1 * th.cos(), -a * th.sin(), 0.2 * t - 0.05 * th.sin(), b * th.cos()],
    );
    let oracle = (df.transpose() * &df).determinant().sqrt();
    let j = spacetime::spacetime_jacobian(&s.domain, t, 0, &[th]).unwrap();
    close(j.direct, oracle, 1e-12);
    assert!(j.relative_gap() < 1e-12);
}

#[test]
fn lateral_integral_examples() {
    let rule = QuadratureRule::gauss(16);
    let one = ScalarField::constant(1.0);
    let s = lab::scenario("shrinking-disk").unwrap();
    let closed = TAU * 1.01f64.sqrt() * 0.95;
    let direct = spacetime::lateral_integral_direct(&s.domain, 0.0, 1.0, &one, &rule).unwrap();
    let iterated = spacetime::lateral_integral_iterated(&s.domain, 0.0, 1.0, &one, &rule).unwrap();
    close(direct.value, closed, 1e-12);
    close(iterated.value, closed, 1e-12);

    let s = lab::scenario("static-disk").unwrap();
    for f in [spacetime::lateral_integral_direct, spacetime::lateral_integral_iterated] {
        close(f(&s.domain, 0.0, 1.0, &one, &rule).unwrap().value, TAU, 1e-13);
        close(f(&s.domain, 0.0, 1.0, &time_only(), &rule).unwrap().value, PI, 1e-13);
    }
}

#[test]
fn lateral_routes_agree_on_every_scenario() {
    let rule = QuadratureRule::gauss(16);
    for sc in lab::registry() {
        let (lo, hi) = sc.time_window;
        for nf in &sc.fields {
            let a = spacetime::lateral_integral_direct(&sc.domain, lo, hi, &nf.field, &rule).unwrap().value;
            let b = spacetime::lateral_integral_iterated(&sc.domain, lo, hi, &nf.field, &rule).unwrap().value;
            assert!((a - b).abs() < 1e-8 * (1.0 + a.abs()), "{} {}: {a} vs {b}", sc.name, nf.name);
        }
    }
}

#[test]
fn empty_time_interval_is_rejected() {
    let s = lab::scenario("static-disk").unwrap();
    let one = ScalarField::constant(1.0);
    assert!(matches!(
        spacetime::lateral_integral_iterated(&s.domain, 1.0, 1.0, &one, &QuadratureRule::gauss(4)),
        Err(TransportError::InvalidInput(_))
    ));
}

#[test]
fn divergence_of_time_like_field_on_shrinking_disk() {
    let s = lab::scenario("shrinking-disk").unwrap();
    let a = SpaceTimeField::time_like(time_only()).unwrap();
    let bal = spacetime::divergence_theorem_residual(&s.domain, 0.0, 1.0, &a, &QuadratureRule::gauss(16)).unwrap();
    let closed = PI * (1.0 - 0.1 + 0.01 / 3.0);
    close(bal.volume, closed, 1e-12);
    close(bal.bottom + bal.lateral + bal.top, closed, 1e-12);
    assert!(bal.residual < 1e-12);
    // the bottom slice at s = 0 carries no flux, the top carries π r(1)²
    assert!(bal.bottom.abs() < 1e-15);
    close(bal.top, PI * 0.81, 1e-12);
}

#[test]
fn divergence_of_radial_field_on_static_disk() {
    let s = lab::scenario("static-disk").unwrap();
    let a = SpaceTimeField::spatial_affine(DMatrix::identity(2, 2), DVector::zeros(2));
    let bal = spacetime::divergence_theorem_residual(&s.domain, 0.0, 1.0, &a, &QuadratureRule::gauss(16)).unwrap();
    close(bal.volume, TAU, 1e-13);
    close(bal.lateral, TAU, 1e-13);
    assert_eq!(bal.top, 0.0);
    assert_eq!(bal.bottom, 0.0);
}

#[test]
fn constant_field_has_balanced_flux() {
    let s = lab::scenario("translating-ellipse").unwrap();
    let a = SpaceTimeField::constant(vec![0.3, 1.0, -0.5]);
    let bal = spacetime::divergence_theorem_residual(&s.domain, -0.5, 0.5, &a, &QuadratureRule::gauss(16)).unwrap();
    assert!(bal.volume.abs() < 1e-14);
    assert!(bal.residual < 1e-8, "{bal:?}");
}

#[test]
fn divergence_balance_on_smooth_scenarios() {
    let rule = QuadratureRule::gauss(16);
    for sc in lab::registry().into_iter().filter(|s| s.smooth) {
        let (lo, hi) = sc.time_window;
        for (name, a) in &sc.divergence_fields {
            let bal = spacetime::divergence_theorem_residual(&sc.domain, lo, hi, a, &rule).unwrap();
            assert!(bal.residual < 1e-6, "{} {name}: {bal:?}", sc.name);
        }
    }
    let cap = lab::scenario("spherical-cap").unwrap();
    assert!(scenarios::divergence_field(&cap, "rotation").is_ok());
    assert!(matches!(
        scenarios::divergence_field(&cap, "nope"),
        Err(TransportError::UnknownField { .. })
    ));
}

#[test]
fn time_like_field_needs_analytic_derivatives() {
    let bare = ScalarField::new(Arc::new(|s, _| s));
    assert!(SpaceTimeField::time_like(bare).is_err());
}
