use super::*;
use crate::exprlang::MapDef;
use approx::assert_abs_diff_eq;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

fn circle_nf(theta: ScalarFn<f64>) -> EdgeNormalForm<f64> {
    EdgeNormalForm::new(
        SpaceCurve::circle_arclength(1.0, Interval::new(-PI, PI)),
        theta,
        Some(ScalarFn::Const(1.0)),
        Some(ScalarFn::Const(1.0)),
        0.15,
    )
    .unwrap()
}

fn helix_nf(theta: &str) -> EdgeNormalForm<f64> {
    EdgeNormalForm::new(
        SpaceCurve::helix_arclength(1.0, 1.0, Interval::new(-1.0, 1.0)),
        ScalarFn::expr(theta, &["u"], &[]).unwrap(),
        Some(ScalarFn::Const(1.0)),
        Some(ScalarFn::Const(1.0)),
        0.15,
    )
    .unwrap()
}

fn grid(strip: &DevStrip<f64>) -> Vec<(f64, f64)> {
    let vs = Interval::new(-strip.halfwidth, strip.halfwidth).linspace(9);
    strip
        .stations(33)
        .into_iter()
        .flat_map(|u| vs.iter().map(move |&v| (u, v)))
        .collect()
}

#[test]
fn second_angle_examples() {
    assert_abs_diff_eq!(second_angle(0.4, 0.3, 1.0, -0.3).unwrap(), FRAC_PI_2);
    let s = FRAC_PI_4.sin();
    assert_abs_diff_eq!(second_angle(FRAC_PI_4, s, 1.0, 0.0).unwrap(), FRAC_PI_4, epsilon = 1e-15);
    assert!(second_angle(0.0, 0.1, 1.0, 0.0).is_err());
    for x in [-50.0, -1.0, 0.0, 2.0, 80.0] {
        let b = second_angle(-0.3, x, 1.0, 0.2).unwrap();
        assert!(b > 0.0 && b < PI);
    }
}

#[test]
fn ruling_of_circle_strip() {
    let strip = DevStrip::new(SpaceCurve::circle_arclength(1.0, Interval::new(-1.0, 1.0)), ScalarFn::Const(FRAC_PI_4), 0.1).unwrap();
    for u in [-0.7, 0.0, 0.4] {
        let f = strip.crease.frenet(u).unwrap();
        let xi = strip.ruling(u).unwrap();
        let want = (f.n + f.b).scale(0.5f64.sqrt());
        assert!((xi - want).norm() < 1e-14);
        let p = strip.point(u, 0.1).unwrap();
        assert!((p - strip.crease.point(u).unwrap() - want.scale(0.1)).norm() < 1e-14);
        assert!((strip.point(u, 0.0).unwrap() - strip.crease.point(u).unwrap()).norm() == 0.0);
        let c = strip.crease.point(u).unwrap();
        let (p1, p2) = (strip.point(u, 0.04).unwrap(), strip.point(u, 0.08).unwrap());
        assert!(((p2 - c) - (p1 - c).scale(2.0)).norm() < 1e-15);
    }
    assert!(matches!(strip.point(0.0, 0.2), Err(DevError::OutOfWidth { .. })));
}

#[test]
fn rulings_are_unit_and_transverse_at_right_angle() {
    let strip = ist(&helix_nf("0.6 + 0.3*sin(u)")).unwrap();
    for u in strip.stations(11) {
        let xi = strip.ruling(u).unwrap();
        assert_abs_diff_eq!(xi.norm(), 1.0, epsilon = 1e-14);
        let s = strip.sample(u).unwrap();
        if (s.beta - FRAC_PI_2).abs() < 1e-15 {
            assert!(xi.dot(&strip.crease.frenet(u).unwrap().e).abs() < 1e-14);
        }
    }
}

#[test]
fn ist_examples() {
    let s = ist(&circle_nf(ScalarFn::Const(0.3))).unwrap();
    for u in s.stations(9) {
        let smp = s.sample(u).unwrap();
        assert_abs_diff_eq!(smp.alpha, 0.3);
        assert_abs_diff_eq!(smp.beta, FRAC_PI_2, epsilon = 1e-14);
    }
    // α' + τ = 0 on the unit-speed helix (τ = 1/2)
    let h = ist(&helix_nf("0.8 - 0.5*u")).unwrap();
    for u in h.stations(9) {
        assert_abs_diff_eq!(h.sample(u).unwrap().beta, FRAC_PI_2, epsilon = 1e-12);
    }
    assert!(matches!(ist(&circle_nf(ScalarFn::Const(0.0))), Err(DevError::ThetaOutOfRange { .. })));
    assert!(ist(&circle_nf(ScalarFn::Const(FRAC_PI_2))).is_err());
    assert!(s.warnings.is_empty());
}

#[test]
fn ist_strips_are_developable() {
    let strips = [
        ist(&circle_nf(ScalarFn::Const(0.3))).unwrap(),
        ist(&circle_nf(ScalarFn::expr("0.5 + 0.2*sin(2*u)", &["u"], &[]).unwrap())).unwrap(),
        ist(&helix_nf("0.3 + 0.1*sin(u)")).unwrap(),
        ist(&helix_nf("-0.7 + 0.2*u^2")).unwrap(),
    ];
    for s in &strips {
        assert_eq!(s.halfwidth, 0.15);
        let chk = s.check(STATIONS).unwrap();
        assert!(chk.ok(1e-8), "{chk:?}");
        for (u, v) in grid(s) {
            let k = s.gaussian_curvature(u, v).unwrap();
            assert!(k.abs() < 1e-6, "K = {k} at ({u}, {v})");
        }
    }
}

#[test]
fn curvature_of_direct_surfaces() {
    let cyl = MapDef::<f64>::parse("cyl", &["u", "v"], &["cos(u)", "sin(u)", "v"], &[]).unwrap();
    let sph = MapDef::<f64>::parse("sph", &["u", "v"], &["cos(u)*cos(v)", "sin(u)*cos(v)", "sin(v)"], &[]).unwrap();
    for (u, v) in [(0.1, 0.2), (1.0, -0.4)] {
        assert!(gaussian_curvature_of(&cyl, u, v).unwrap().abs() < 1e-12);
        assert_abs_diff_eq!(gaussian_curvature_of(&sph, u, v).unwrap(), 1.0, epsilon = 1e-12);
    }
    assert!(matches!(gaussian_curvature_of(&sph, 0.0, FRAC_PI_2), Err(DevError::DegenerateMetric { .. })));
}

#[test]
fn strip_isomers_commute() {
    for nf in [circle_nf(ScalarFn::Const(0.3)), helix_nf("0.5 + 0.1*sin(u)")] {
        let s = ist(&nf).unwrap();
        let iso = strip_isomers(&s).unwrap();
        let neg = s.dual();
        let back = neg.dual();
        for u in s.stations(STATIONS) {
            let a = iso.dual.sample(u).unwrap();
            let b = neg.sample(u).unwrap();
            assert!((a.alpha - b.alpha).abs() < 1e-10);
            assert!((a.beta - b.beta).abs() < 1e-10);
            assert_eq!(back.sample(u).unwrap().alpha, s.sample(u).unwrap().alpha);
        }
        assert!(iso.inverse.check(33).unwrap().ok(1e-8));
        assert!(iso.inverse_dual.check(33).unwrap().ok(1e-8));
    }
    let circle = strip_isomers(&ist(&circle_nf(ScalarFn::Const(0.3))).unwrap()).unwrap();
    assert_abs_diff_eq!(circle.dual.sample(0.2).unwrap().alpha, -0.3);
    assert_abs_diff_eq!(circle.dual.sample(0.2).unwrap().beta, FRAC_PI_2, epsilon = 1e-14);
    let bare = DevStrip::new(SpaceCurve::circle_arclength(1.0, Interval::new(-1.0, 1.0)), ScalarFn::Const(0.3), 0.1).unwrap();
    assert!(matches!(strip_isomers(&bare), Err(DevError::MissingSource)));
}

#[test]
fn curved_foldings() {
    let s = ist(&helix_nf("0.5 + 0.1*sin(u)")).unwrap();
    for split in [Split::U, Split::V] {
        let cf = curved_folding(&s, split).unwrap();
        for u in s.stations(9) {
            assert!((cf.point(u, 0.0).unwrap() - s.crease.point(u).unwrap()).norm() < 1e-15);
        }
        let [m1, m2] = cf.meshes(17, 5).unwrap();
        assert_eq!(m1.vertices.len(), 17 * 5);
        assert_eq!(m2.quads().len(), 16 * 4);
    }
    let cf = curved_folding(&s, Split::U).unwrap();
    assert_eq!(cf.point(0.4, 0.1).unwrap(), s.point(0.4, 0.1).unwrap());
    for (u, v) in grid(&cf.dual) {
        assert!(cf.dual.gaussian_curvature(u, v).unwrap().abs() < 1e-6);
    }
}

#[test]
fn obj_and_csv_export() {
    assert_eq!(format_g9(1.0), "1");
    assert_eq!(format_g9(-0.123456789123), "-0.123456789");
    assert_eq!(format_g9(123456.7891234), "123456.789");
    assert_eq!(format_g9(1.5e-7), "1.5e-7");
    let s = ist(&circle_nf(ScalarFn::Const(0.3))).unwrap();
    let m = s.mesh(3, 2).unwrap();
    let mut buf = Vec::new();
    write_obj(&mut buf, &[("strip", &m)]).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 6);
    assert!(text.lines().any(|l| l == "f 1 3 4 2"));
    let mut csv_buf = Vec::new();
    write_profiles_csv(&mut csv_buf, &s.profiles(3).unwrap()).unwrap();
    let csv_text = String::from_utf8(csv_buf).unwrap();
    assert!(csv_text.starts_with("u,alpha,beta,kappa,tau\n"));
    assert_eq!(csv_text.lines().count(), 4);
}
