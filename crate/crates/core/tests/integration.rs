use std::f64::consts::{FRAC_PI_4, PI, TAU};

use evolve_transport::domain::ScalarField;
use evolve_transport::integration::{integrate_boundary, integrate_domain, integrate_immersed};
use evolve_transport::lab;
use evolve_transport::quadrature::QuadratureRule;
use evolve_transport::TransportError;

fn close(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol * (1.0 + b.abs()), "{a} vs {b} (tol {tol})");
}

/// Composite Simpson on `[a, b]` with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn circle_length_by_area_formula() {
    let s = lab::scenario("shrinking-disk").unwrap();
    // radius 1 - t/10 = 0.9 at t = 1
    let len = integrate_immersed(&s.domain.boundary, 1.0, &ScalarField::constant(1.0), &QuadratureRule::gauss(32), 1e-10)
        .unwrap();
    close(len.value, TAU * 0.9, 1e-13);
    assert!(len.error_indicator < 1e-12);
}

#[test]
fn cap_boundary_length() {
    let s = lab::scenario("spherical-cap").unwrap();
    let len = integrate_boundary(&s.domain, 0.0, |_| Ok(1.0), &QuadratureRule::gauss(32)).unwrap();
    close(len.value, TAU * FRAC_PI_4.sin(), 1e-13);
}

#[test]
fn odd_integrand_over_circle_vanishes() {
    let s = lab::scenario("static-disk").unwrap();
    let v = integrate_boundary(&s.domain, 0.0, |g| Ok(g.point[0]), &QuadratureRule::gauss(32)).unwrap();
    assert!(v.value.abs() < 1e-14, "{}", v.value);
}

#[test]
fn interval_boundary_is_a_counting_measure() {
    let s = lab::scenario("static-interval").unwrap();
    let v = integrate_boundary(&s.domain, 0.0, |_| Ok(1.0), &QuadratureRule::gauss(16)).unwrap();
    assert_eq!(v.value, 2.0);
    let flux = integrate_boundary(&s.domain, 0.3, |g| Ok(g.normal_velocity), &QuadratureRule::gauss(16)).unwrap();
    assert_eq!(flux.value, 0.0);
}

#[test]
fn shrinking_disk_normal_velocity_flux() {
    let s = lab::scenario("shrinking-disk").unwrap();
    let v = integrate_boundary(&s.domain, 0.0, |g| Ok(g.normal_velocity), &QuadratureRule::gauss(32)).unwrap();
    close(v.value, -0.1 * TAU, 1e-12);
    close(v.value, -0.6283185307, 1e-10);
}

#[test]
fn static_domain_flux_is_zero() {
    for name in ["static-disk", "static-ball"] {
        let s = lab::scenario(name).unwrap();
        let v = integrate_boundary(&s.domain, 0.5, |g| Ok(g.normal_velocity), &QuadratureRule::gauss(16)).unwrap();
        assert!(v.value.abs() < 1e-14, "{name}: {}", v.value);
    }
}

#[test]
fn disk_and_ball_volumes() {
    let s = lab::scenario("static-disk").unwrap();
    let rule = QuadratureRule::gauss(16);
    close(integrate_domain(&s.domain, 0.0, &ScalarField::constant(1.0), &rule).unwrap().value, PI, 1e-13);
    let r2 = s.field("x2").unwrap();
    close(integrate_domain(&s.domain, 0.0, &r2.field, &rule).unwrap().value, PI / 4.0, 1e-13);

    let b = lab::scenario("static-ball").unwrap();
    close(integrate_domain(&b.domain, 0.0, &ScalarField::constant(1.0), &rule).unwrap().value, 4.0 * PI / 3.0, 1e-13);
    let r2 = b.field("r2").unwrap();
    close(integrate_domain(&b.domain, 0.0, &r2.field, &rule).unwrap().value, 4.0 * PI / 5.0, 1e-13);
}

#[test]
fn radius_squared_over_unit_disk() {
    let s = lab::scenario("static-disk").unwrap();
    let r2 = evolve_transport::lab::fields::by_name("r2").unwrap();
    let v = integrate_domain(&s.domain, 0.0, &r2, &QuadratureRule::gauss(16)).unwrap();
    close(v.value, PI / 2.0, 1e-13);
}

#[test]
fn cap_area_against_simpson() {
    let s = lab::scenario("spherical-cap").unwrap();
    let v = integrate_domain(&s.domain, 0.0, &ScalarField::constant(1.0), &QuadratureRule::gauss(16)).unwrap();
    // 2π ∫₀^{π/4} sin θ dθ
    let oracle = TAU * simpson(f64::sin, 0.0, FRAC_PI_4, 2000);
    close(v.value, oracle, 1e-12);
    close(v.value, 1.840302369, 1e-9);
}

#[test]
fn figure_eight_area_against_simpson() {
    let s = lab::scenario("figure-eight").unwrap();
    for t in [-0.3, 0.0, 0.25, 0.5] {
        let v = integrate_domain(&s.domain, t, &ScalarField::constant(1.0), &QuadratureRule::gauss(32)).unwrap();
        // area = ∫ 2√(1-x²)|x+t| dx, split at the kink x = -t; the √ endpoint
        // singularities are removed by x = sin u
        let g = |u: f64| 2.0 * u.cos() * u.cos() * (u.sin() + t).abs();
        let k = -(t.asin());
        let oracle = simpson(g, -PI / 2.0, k, 20000) + simpson(g, k, PI / 2.0, 20000);
        close(v.value, oracle, 1e-10);
    }
}

#[test]
fn monte_carlo_agrees_with_gauss() {
    for name in ["static-disk", "spherical-cap", "static-ball"] {
        let s = lab::scenario(name).unwrap();
        let one = ScalarField::constant(1.0);
        let g = integrate_domain(&s.domain, 0.0, &one, &QuadratureRule::gauss(16)).unwrap().value;
        let mc = integrate_domain(&s.domain, 0.0, &one, &QuadratureRule::monte_carlo(200_000, 7)).unwrap();
        assert!(
            (mc.value - g).abs() < 5.0 * mc.error_indicator,
            "{name}: mc {} ± {} vs {g}",
            mc.value,
            mc.error_indicator
        );
    }
}

#[test]
fn monte_carlo_is_reproducible_by_seed() {
    let s = lab::scenario("shrinking-disk").unwrap();
    let one = ScalarField::constant(1.0);
    let a = integrate_domain(&s.domain, 0.0, &one, &QuadratureRule::monte_carlo(100_000, 42)).unwrap();
    let b = integrate_domain(&s.domain, 0.0, &one, &QuadratureRule::monte_carlo(100_000, 42)).unwrap();
    let c = integrate_domain(&s.domain, 0.0, &one, &QuadratureRule::monte_carlo(100_000, 43)).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_ne!(a.value, c.value);
}

#[test]
fn gauss_without_bulk_has_no_path() {
    let mut s = lab::scenario("static-disk").unwrap();
    s.domain.bulk = None;
    let err = integrate_domain(&s.domain, 0.0, &ScalarField::constant(1.0), &QuadratureRule::gauss(8)).unwrap_err();
    assert!(matches!(err, TransportError::NoIntegrationPath));
    // sampling still works through the membership indicator
    assert!(integrate_domain(&s.domain, 0.0, &ScalarField::constant(1.0), &QuadratureRule::monte_carlo(1000, 1)).is_ok());
}

#[test]
fn ellipse_area_matches_product_of_axes() {
    let s = lab::scenario("translating-ellipse").unwrap();
    for t in [-0.8, 0.0, 0.6] {
        let v = integrate_domain(&s.domain, t, &ScalarField::constant(1.0), &QuadratureRule::gauss(16)).unwrap();
        close(v.value, PI * (1.2 + 0.1 * t) * (0.7 - 0.05 * t), 1e-13);
    }
}

#[test]
fn torus_patch_area_against_simpson() {
    let s = lab::scenario("torus-patch").unwrap();
    let v = integrate_domain(&s.domain, 0.0, &ScalarField::constant(1.0), &QuadratureRule::gauss(32)).unwrap();
    // at t = 0 the patch is the chart disk of radius 0.6 about (π, π); the area
    // element is ½ (2 + ½ cos β) and cos β = -cos y for β = π + y
    let rho: f64 = 0.6;
    let strip = |u: f64| {
        let y = rho * u.sin();
        y.cos() * 2.0 * rho * u.cos() * rho * u.cos()
    };
    let oracle = PI * rho * rho - 0.25 * simpson(strip, -PI / 2.0, PI / 2.0, 4000);
    close(v.value, oracle, 1e-12);
}
