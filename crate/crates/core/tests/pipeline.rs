//! End-to-end use of the public API: germ to normal form to isomers to strips and meshes.

use std::f64::consts::PI;

use frontal_core::curve::SpaceCurve;
use frontal_core::devfold::{curved_folding, ist, strip_isomers, write_obj, Split};
use frontal_core::germ::{by_name, Rect};
use frontal_core::isomer::{detect_predicates, isomer_report, IsomerSet, SignConvention};
use frontal_core::normalform::{from_normal_form, to_normal_form, EdgeNormalForm, NormalFormError, ScalarFn};
use frontal_core::numkit::Interval;
use frontal_core::symmetry::detect_symmetries;
use frontal_core::{EdgeNormalForm64, SurfaceGerm64};

fn helix_edge() -> EdgeNormalForm64 {
    EdgeNormalForm::new(
        SpaceCurve::helix_arclength(1.0, 1.0, Interval::new(-1.0, 1.0)),
        ScalarFn::expr("0.5 + 0.1*sin(u)", &["u"], &[]).unwrap(),
        Some(ScalarFn::Const(1.0)),
        Some(ScalarFn::Const(1.0)),
        0.15,
    )
    .unwrap()
}

#[test]
fn straight_crease_has_no_normal_form() {
    // f_C = (v², v³, u) has a straight crease
    let g: SurfaceGerm64 = by_name("f_C").unwrap();
    assert!(matches!(to_normal_form(&g, 0.1, 1e-10), Err(NormalFormError::Curve(_))));
}

#[test]
fn helix_edge_round_trips_and_yields_developable_foldings() {
    let nf = helix_edge();
    let germ = from_normal_form(&nf).unwrap();
    let back = to_normal_form(&germ, 0.15, 1e-12).unwrap();
    for u in back.stations(17) {
        assert!((back.theta_at(u).unwrap() - nf.theta_at(u).unwrap()).abs() < 1e-6);
    }

    let set = IsomerSet::new(&back).unwrap();
    let preds = detect_predicates(&back, SignConvention::ProperIsPositive, 1e-6).unwrap();
    let report = isomer_report(&set, preds, 33, 1e-6).unwrap();
    let json = serde_json::to_value(&report).unwrap();
    assert_eq!(json["profiles"].as_array().unwrap().len(), 4);

    let strip = ist(&back).unwrap();
    assert!(strip.check(65).unwrap().ok(1e-8));
    let iso = strip_isomers(&strip).unwrap();
    assert!(iso.inverse.check(33).unwrap().ok(1e-8));

    let fold = curved_folding(&strip, Split::V).unwrap();
    let [a, b] = fold.meshes(17, 5).unwrap();
    let mut buf = Vec::new();
    write_obj(&mut buf, &[("F", &a), ("F_dual", &b)]).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 2 * 17 * 5);
    assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 2 * 16 * 4);
}

#[test]
fn planar_edge_reports_limiting_normal_curvature() {
    let edge = EdgeNormalForm::new(
        SpaceCurve::circle_arclength(1.0, Interval::new(-PI / 2.0, PI / 2.0)),
        ScalarFn::Const(0.3),
        Some(ScalarFn::Const(1.0)),
        Some(ScalarFn::Const(1.0)),
        0.15,
    )
    .unwrap();
    let germ = from_normal_form(&edge)
        .unwrap()
        .with_domain(Rect::new(Interval::new(-0.3, 0.3), Interval::new(-0.1, 0.1)))
        .unwrap();
    let report = detect_symmetries(&germ, [0.0, 0.0], 1e-6).unwrap();
    assert!(report.valid());
    let k = report.kappa_nu.unwrap();
    assert!((k.abs() - 0.3f64.sin()).abs() < 1e-6, "{k}");
}

#[test]
fn reports_serialise() {
    let nf = helix_edge();
    let r = nf.report(9).unwrap();
    let v = serde_json::to_value(&r).unwrap();
    assert_eq!(v["stations"].as_array().unwrap().len(), 9);
    let g: SurfaceGerm64 = by_name("f_S").unwrap();
    let s = detect_symmetries(&g, [0.0, 0.0], 1e-6).unwrap();
    let v = serde_json::to_value(&s).unwrap();
    assert_eq!(v["findings"][0]["case"], "iii");
}
