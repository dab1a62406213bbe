use std::f64::consts::{FRAC_PI_4, PI, TAU};

use evolve_transport::lab::scenarios::{self, TimeFunction};
use evolve_transport::lab::{
    self, fields, leibniz_check, lhs_time_derivative, reynolds_check, rhs_transport, verify_transport, NamedField,
};
use evolve_transport::quadrature::QuadratureRule;
use evolve_transport::TransportError;

const H: f64 = 1e-4;

fn rule() -> QuadratureRule {
    QuadratureRule::gauss(16)
}

fn close(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol * (1.0 + b.abs()), "{a} vs {b} (tol {tol})");
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn lhs_examples() {
    let s = lab::scenario("static-disk").unwrap();
    let v = lhs_time_derivative(&s, &fields::one_plus_first_squared(), 0.2, H, &rule()).unwrap();
    assert!(v.value.abs() < 1e-9, "{}", v.value);

    let s = lab::scenario("shrinking-disk").unwrap();
    let v = lhs_time_derivative(&s, &fields::one(), 0.0, H, &rule()).unwrap();
    close(v.value, -0.2 * PI, 1e-9);
    close(v.value, -0.6283185, 1e-7);

    let s = lab::scenario("spherical-cap").unwrap();
    let v = lhs_time_derivative(&s, &fields::one(), 0.0, H, &rule()).unwrap();
    close(v.value, TAU * FRAC_PI_4.sin() * 0.1, 1e-8);
    close(v.value, 0.4442883, 1e-7);
}

#[test]
fn rhs_examples() {
    let s = lab::scenario("static-disk").unwrap();
    let (b, d) = rhs_transport(&s, &fields::first_squared(), 0.0, &rule()).unwrap();
    assert_eq!((b.value, d.value), (0.0, 0.0));

    let s = lab::scenario("shrinking-disk").unwrap();
    let (b, d) = rhs_transport(&s, &fields::one(), 0.0, &rule()).unwrap();
    assert_eq!(b.value, 0.0);
    close(d.value, -0.6283185307179586, 1e-13);

    let s = lab::scenario("expanding-ball").unwrap();
    let (b, d) = rhs_transport(&s, &fields::one(), 0.0, &rule()).unwrap();
    assert_eq!(b.value, 0.0);
    close(d.value, 4.0 * PI, 1e-13);
}

#[test]
fn shrinking_disk_verifies() {
    let s = lab::scenario("shrinking-disk").unwrap();
    let r = verify_transport(&s, "one", 0.0, H, &rule()).unwrap();
    assert!(r.passed && r.rel_residual < 1e-6, "{r:?}");
    close(r.lhs, -0.2 * PI, 1e-9);
    close(r.rhs, -0.2 * PI, 1e-13);
    assert_eq!(r.tolerance, 1e-6);
    assert!(r.failure.is_none());
    close(r.diagnostics.reference_rate.unwrap(), -0.2 * PI, 1e-15);
}

#[test]
fn figure_eight_against_refined_and_simpson_oracles() {
    let s = lab::scenario("figure-eight").unwrap();
    let t = 0.5;
    let r = verify_transport(&s, "one-plus-x2", t, H, &rule()).unwrap();
    assert!(r.passed && r.rel_residual < 1e-4, "{r:?}");
    assert_eq!(r.tolerance, 1e-4);

    // refined lhs: halved step, doubled order
    let refined = lhs_time_derivative(&s, &fields::one_plus_first_squared(), t, H / 2.0, &QuadratureRule::gauss(32))
        .unwrap()
        .value;
    assert!((refined - r.rhs).abs() / refined.abs().max(1.0) < 1e-4);

    // dI/dt = ∫ (1+x²) 2√(1-x²) sign(x+t) dx, in x = sin u
    let g = |u: f64| (1.0 + u.sin().powi(2)) * 2.0 * u.cos().powi(2);
    let k = -(t as f64).asin();
    let oracle = simpson(g, k, PI / 2.0, 20000) - simpson(g, -PI / 2.0, k, 20000);
    close(r.rhs, oracle, 1e-8);
    close(r.lhs, oracle, 1e-6);
}

#[test]
fn figure_eight_area_rate_through_the_crossing() {
    let s = lab::scenario("figure-eight").unwrap();
    for t in [0.0, 0.25, 0.5] {
        let r = verify_transport(&s, "one", t, H, &rule()).unwrap();
        assert!(r.passed, "{r:?}");
        // oracle: dA/dt = ∫ 2√(1-x²) sign(x+t) dx
        let g = |u: f64| 2.0 * u.cos().powi(2);
        let k = -(t as f64).asin();
        let oracle = simpson(g, k, PI / 2.0, 20000) - simpson(g, -PI / 2.0, k, 20000);
        close(r.rhs, oracle, 1e-8);
        close(scenarios::figure_eight_area_rate(t), oracle, 1e-10);
    }
}

#[test]
fn leibniz_examples() {
    let r = leibniz_check(
        &TimeFunction::linear(0.0, 1.0),
        &TimeFunction::quadratic(2.0, 0.0, 1.0),
        &fields::first_coordinate(),
        1.0,
        H,
        &rule(),
    )
    .unwrap();
    // φ(b) b' − φ(a) a' = 3·2 − 1·1
    assert_eq!(r.endpoint_formula, 5.0);
    assert!(r.boundary_gap < 1e-8);
    close(r.lhs, 5.0, 1e-8);
    close(r.rhs_bulk + r.rhs_boundary, 5.0, 1e-8);

    let r = leibniz_check(
        &TimeFunction::constant(0.0),
        &TimeFunction::constant(1.0),
        &fields::first_squared(),
        0.0,
        H,
        &rule(),
    )
    .unwrap();
    assert_eq!((r.lhs, r.rhs_bulk, r.endpoint_formula), (0.0, 0.0, 0.0));
    assert_eq!(r.rhs_boundary, 0.0);

    let r = leibniz_check(
        &TimeFunction::linear(0.0, -1.0),
        &TimeFunction::linear(0.0, 1.0),
        &fields::one(),
        1.0,
        H,
        &rule(),
    )
    .unwrap();
    close(r.lhs, 2.0, 1e-10);
    assert_eq!(r.endpoint_formula, 2.0);
    assert!(r.boundary_gap < 1e-12);
}

#[test]
fn leibniz_with_time_dependent_field() {
    // I(t) = ∫_t^{2+t²} (1+x²) cos t dx, differentiated by hand
    let a = TimeFunction::linear(0.0, 1.0);
    let b = TimeFunction::quadratic(2.0, 0.0, 1.0);
    let t: f64 = 0.7;
    let (at, bt) = (t, 2.0 + t * t);
    let prim = |x: f64| x + x.powi(3) / 3.0;
    let exact = -t.sin() * (prim(bt) - prim(at)) + t.cos() * ((1.0 + bt * bt) * 2.0 * t - (1.0 + at * at));
    let r = leibniz_check(&a, &b, &fields::wave(), t, H, &rule()).unwrap();
    close(r.rhs_bulk + r.endpoint_formula, exact, 1e-12);
    assert!(r.rel_residual < 1e-6, "{r:?}");
    assert!(r.boundary_gap < 1e-8);
}

#[test]
fn leibniz_rejects_degenerate_intervals() {
    let err = leibniz_check(
        &TimeFunction::constant(0.0),
        &TimeFunction::constant(5e-4),
        &fields::one(),
        0.0,
        H,
        &rule(),
    )
    .unwrap_err();
    assert!(matches!(err, TransportError::DegenerateInterval { .. }));
    let err = leibniz_check(
        &TimeFunction::constant(1.0),
        &TimeFunction::constant(0.0),
        &fields::one(),
        0.0,
        H,
        &rule(),
    )
    .unwrap_err();
    assert!(matches!(err, TransportError::DegenerateInterval { .. }));
}

#[test]
fn reynolds_examples() {
    let s = lab::scenario("expanding-ball").unwrap();
    let r = reynolds_check(&s, "one", 0.0, H, &rule()).unwrap();
    close(r.lhs, 4.0 * PI, 1e-8);
    close(r.rhs, 4.0 * PI, 1e-13);
    assert!(r.rel_residual < 1e-6);

    let r = reynolds_check(&s, "x2", 0.0, H, &rule()).unwrap();
    assert_eq!(r.rhs_bulk, 0.0);
    // ∮_{|x|=1} x² dA = 4π/3 = d/dt (4π r⁵/15) at r = 1, r' = 1
    close(r.rhs_boundary, 4.0 * PI / 3.0, 1e-13);
    // central-difference truncation h²/6 · I''' = h²/6 · 16π
    assert!((r.lhs - 4.0 * PI / 3.0).abs() < 1.1 * H * H / 6.0 * 16.0 * PI);

    let s = lab::scenario("static-ball").unwrap();
    let r = reynolds_check(&s, "linear-in-time", 0.3, H, &rule()).unwrap();
    // bulk term only: ∫_B (1 + x²) = 4π/3 + 4π/15
    let g = 4.0 * PI / 3.0 + 4.0 * PI / 15.0;
    close(r.lhs, g, 1e-10);
    close(r.rhs_bulk, g, 1e-13);
    assert_eq!(r.rhs_boundary, 0.0);
}

#[test]
fn reynolds_requires_flat_three_space() {
    for name in ["spherical-cap", "shrinking-disk", "torus-patch"] {
        let s = lab::scenario(name).unwrap();
        let field = &s.fields[0].name;
        assert!(matches!(reynolds_check(&s, field, 0.0, H, &rule()), Err(TransportError::InvalidInput(_))));
    }
}

#[test]
fn request_errors() {
    let s = lab::scenario("shrinking-disk").unwrap();
    assert!(matches!(verify_transport(&s, "nope", 0.0, H, &rule()), Err(TransportError::UnknownField { .. })));
    assert!(matches!(
        verify_transport(&s, "one", 2.0, H, &rule()),
        Err(TransportError::WindowExceeded { .. })
    ));
    assert!(matches!(
        verify_transport(&s, "one", 0.0, 0.0, &rule()),
        Err(TransportError::InvalidInput(_))
    ));
    assert!(matches!(
        verify_transport(&s, "one", 0.0, f64::NAN, &rule()),
        Err(TransportError::InvalidInput(_))
    ));
    assert!(matches!(lab::scenario("teapot"), Err(TransportError::UnknownScenario(_))));
    assert!(matches!(
        rhs_transport(&s, &fields::one(), 5.0, &rule()),
        Err(TransportError::WindowExceeded { .. })
    ));
}

#[test]
fn numerical_failure_becomes_a_failed_report() {
    let mut s = lab::scenario("shrinking-disk").unwrap();
    s.domain.bulk = None;
    let r = verify_transport(&s, "one", 0.0, H, &rule()).unwrap();
    assert!(!r.passed);
    assert!(r.lhs.is_nan() && r.rel_residual.is_nan());
    assert!(r.failure.as_deref().unwrap().starts_with("NoIntegrationPath"), "{:?}", r.failure);
}

#[test]
fn degenerate_directions() {
    // V∂ ≡ 0: the boundary term vanishes and the bulk term carries everything
    for name in ["static-disk", "static-ball", "static-interval"] {
        let s = lab::scenario(name).unwrap();
        for nf in &s.fields {
            let r = verify_transport(&s, &nf.name, 0.1, H, &rule()).unwrap();
            let tol = r.tolerance;
            assert!(r.rhs_boundary.abs() < tol, "{name} {}", nf.name);
            assert!((r.lhs - r.rhs_bulk).abs() / r.lhs.abs().max(1.0) < tol, "{name} {}", nf.name);
        }
    }
    // time-independent φ: the bulk term vanishes
    for name in ["shrinking-disk", "translating-ellipse", "expanding-ball", "figure-eight"] {
        let s = lab::scenario(name).unwrap();
        for field in ["one", "x2", "one-plus-x2", "r2"] {
            if s.field(field).is_err() {
                continue;
            }
            let r = verify_transport(&s, field, 0.2, H, &rule()).unwrap();
            assert!(r.rhs_bulk.abs() < r.tolerance, "{name} {field}");
            assert!(r.passed, "{r:?}");
        }
    }
}

#[test]
fn residual_is_subadditive_under_linear_combination() {
    let (alpha, beta) = (2.5, -0.75);
    for name in ["translating-ellipse", "spherical-cap", "torus-patch"] {
        let mut s = lab::scenario(name).unwrap();
        let phi1 = fields::pulse();
        let phi2 = s.fields.last().unwrap().field.clone();
        let combo = phi1.linear_combination(alpha, &phi2, beta);
        for (n, f) in [("phi1", phi1), ("phi2", phi2), ("combo", combo)] {
            s.fields.push(NamedField {
                name: n.into(),
                field: f,
                reference: None,
            });
        }
        let t = 0.3;
        let res = |f: &str| verify_transport(&s, f, t, H, &rule()).unwrap().abs_residual;
        let bound = alpha.abs() * res("phi1") + beta.abs() * res("phi2") + 1e-10;
        assert!(res("combo") <= bound, "{name}: {} > {bound}", res("combo"));
    }
}

#[test]
fn time_shift_is_bit_identical() {
    let c = 1.0;
    let t = 0.25;
    let h = 2f64.powi(-14);
    for name in ["shrinking-disk", "spherical-cap", "figure-eight", "leibniz-interval"] {
        let s = lab::scenario(name).unwrap();
        let shifted = s.time_shifted(c);
        for nf in &s.fields {
            let a = verify_transport(&s, &nf.name, t, h, &rule()).unwrap();
            let b = verify_transport(&shifted, &nf.name, t + c, h, &rule()).unwrap();
            for (x, y) in [(a.lhs, b.lhs), (a.rhs_bulk, b.rhs_bulk), (a.rhs_boundary, b.rhs_boundary)] {
                assert_eq!(x.to_bits(), y.to_bits(), "{name} {}", nf.name);
            }
            assert_eq!(b.t, t + c);
        }
    }
}

#[test]
fn all_fields_pass_at_the_window_midpoint() {
    for s in lab::registry() {
        let (lo, hi) = s.time_window;
        let t = 0.5 * (lo + hi);
        for nf in &s.fields {
            let r = verify_transport(&s, &nf.name, t, H, &rule()).unwrap();
            assert!(r.passed, "{r:?}");
            if let Some(reference) = &nf.reference {
                close(r.rhs, (reference.derivative)(t), 1e-9);
            }
        }
    }
}

#[test]
fn references_match_independent_integrals() {
    let rule = QuadratureRule::gauss(16);
    for s in lab::registry() {
        for t in s.interior_times(2) {
            for nf in &s.fields {
                if let Some(reference) = &nf.reference {
                    let v = evolve_transport::integration::integrate_domain(&s.domain, t, &nf.field, &rule).unwrap();
                    close(v.value, (reference.integral)(t), 1e-10);
                }
            }
        }
    }
}

#[test]
fn closed_form_rates_match_richardson_differences() {
    // fourth-order Richardson difference of each closed-form integral
    for s in lab::registry() {
        for nf in &s.fields {
            let Some(reference) = &nf.reference else { continue };
            let t = 0.5 * (s.time_window.0 + s.time_window.1);
            let i = &reference.integral;
            let d = |h: f64| (i(t + h) - i(t - h)) / (2.0 * h);
            let rich = (4.0 * d(1e-3) - d(2e-3)) / 3.0;
            close((reference.derivative)(t), rich, 1e-9);
        }
    }
}
