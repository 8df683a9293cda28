use super::*;
use crate::curve::SpaceCurve;
use crate::exprlang::MapDef;
use crate::germ::{by_name, Rect, SurfaceGerm};
use crate::normalform::{from_normal_form, ScalarFn};
use crate::numkit::FnMap;
use approx::assert_abs_diff_eq;
use std::f64::consts::PI;

fn iv(a: f64, b: f64) -> Interval<f64> {
    Interval::new(a, b)
}

fn germ(name: &str) -> SurfaceGerm<f64> {
    by_name(name).unwrap()
}

#[test]
fn lifts_of_examples() {
    let l = legendrian_lift(&germ("f_C"), &[0.0, 0.0]).unwrap();
    assert_eq!(l.fx, vec![0.0, 0.0, 0.0]);
    assert!((l.nu[0]).abs() < 1e-15 && (l.nu[1] - 1.0).abs() < 1e-15 && l.nu[2].abs() < 1e-15);
    let pl = germ("plane");
    for x in [[0.1, 0.2], [-0.5, 0.3]] {
        assert_eq!(legendrian_lift(&pl, &x).unwrap().nu, vec![0.0, 0.0, 1.0]);
    }
    let cusp = PlaneCurve::<f64>::parse("cusp", ["t^2", "t^3"], iv(-1.0, 1.0)).unwrap();
    assert_eq!(cusp.cusps(), &[0.0]);
    let n0 = cusp.normal(&[0.0]).unwrap();
    assert_abs_diff_eq!(n0[0], 0.0);
    assert_abs_diff_eq!(n0[1], 1.0);
    for t in [-0.6, -1e-3, 1e-3, 0.4] {
        let n = cusp.normal(&[t]).unwrap();
        let want = [-3.0 * t, 2.0];
        let len = (want[0] * want[0] + want[1] * want[1]).sqrt();
        assert_abs_diff_eq!(n[0], want[0] / len, epsilon = 1e-12);
        assert_abs_diff_eq!(n[1], want[1] / len, epsilon = 1e-12);
    }
}

#[test]
fn image_inclusions() {
    let c = germ("f_C");
    let full = Frontal::domain(&c);
    let same = image_subset(&c, &full, &c, &full, 1e-8).unwrap();
    assert!(same.subset && same.distance < 1e-12);
    let half = image_subset(&c, &shrink(&full, 0.5), &c, &full, 1e-8).unwrap();
    assert!(half.subset);
    let s = germ("f_S");
    let near = vec![iv(-0.2, 0.2), iv(-0.2, 0.2)];
    let cs = image_subset(&c, &near, &s, &Frontal::domain(&s), 1e-3).unwrap();
    assert!(!cs.subset, "{}", cs.distance);
}

#[test]
fn connecting_map_of_plane_cusps() {
    let f1 = PlaneCurve::<f64>::parse("f1", ["t^6", "t^9"], iv(-0.5, 0.5)).unwrap();
    let f2 = PlaneCurve::<f64>::parse("f2", ["t^2", "t^3"], iv(-1.0, 1.0)).unwrap();
    let m = connecting_map(&f1, &f2, 1e-8).unwrap();
    assert_eq!(m.sign, 1);
    let worst = m.samples.iter().fold(0.0f64, |w, s| w.max((s.psi[0] - s.x[0].powi(3)).abs()));
    assert!(worst < 1e-6, "{worst}");
    assert!(m.injective);
    let mut buf = Vec::new();
    m.write_csv(&mut buf).unwrap();
    assert!(String::from_utf8(buf).unwrap().starts_with("x1,psi1,residual\n"));
}

#[test]
fn connecting_map_to_itself_is_identity() {
    for name in ["f_C", "f_S", "f_CW", "ccr_example", "sw_example"] {
        let g = germ(name);
        let m = connecting_map_on(&g, &shrink(&Frontal::domain(&g), 0.5), &g, &Frontal::domain(&g), 1e-6).unwrap();
        assert_eq!(m.sign, 1, "{name}");
        for s in &m.samples {
            assert!(dist2(&s.x, &s.psi).sqrt() < 1e-6, "{name}: {:?} -> {:?}", s.x, s.psi);
        }
    }
    let c = PlaneCurve::<f64>::parse("c", ["t^2", "t^3"], iv(-1.0, 1.0)).unwrap();
    let m = connecting_map(&c, &c, 1e-9).unwrap();
    assert!(m.samples.iter().all(|s| (s.x[0] - s.psi[0]).abs() < 1e-9));
}

#[test]
fn connecting_map_recovers_known_diffeomorphism() {
    // f2 = f1 ∘ φ⁻¹ with φ = A ∘ B, A(u,v) = (u + 0.1 v², v), B(u,v) = (u, v + 0.2 u + 0.1 u²)
    let f1 = germ("f_C");
    let inv = "(v - 0.2*(u - 0.1*v^2) - 0.1*(u - 0.1*v^2)^2)";
    let a = "(u - 0.1*v^2)";
    let f2 = SurfaceGerm::<f64>::parse("moved", [&format!("{inv}^2"), &format!("{inv}^3"), a], &[], Rect::square(2.0))
        .unwrap()
        .with_normal_exprs([&format!("-3*{inv}"), "2", "0"], &[])
        .unwrap();
    let v1 = vec![iv(-0.5, 0.5), iv(-0.5, 0.5)];
    let m = connecting_map_on(&f1, &v1, &f2, &Frontal::domain(&f2), 1e-7).unwrap();
    let phi = |u: f64, v: f64| {
        let (u1, v1) = (u, v + 0.2 * u + 0.1 * u * u);
        [u1 + 0.1 * v1 * v1, v1]
    };
    for s in &m.samples {
        let want = phi(s.x[0], s.x[1]);
        assert!((s.psi[0] - want[0]).abs() < 1e-5 && (s.psi[1] - want[1]).abs() < 1e-5, "{:?}", s);
    }
}

#[test]
fn connecting_map_of_t_flip() {
    let g = germ("f_C");
    let flipped = SurfaceGerm::<f64>::parse("flip", ["(-v)^2", "(-v)^3", "u"], &[], Rect::square(1.0))
        .unwrap()
        .with_normal_exprs(["3*v", "2", "0"], &[])
        .unwrap();
    let m = connecting_map_on(&g, &shrink(&Frontal::domain(&g), 0.5), &flipped, &Frontal::domain(&flipped), 1e-6).unwrap();
    assert_eq!(m.sign, 1);
    for s in &m.samples {
        assert!((s.psi[0] - s.x[0]).abs() < 1e-6 && (s.psi[1] + s.x[1]).abs() < 1e-6);
    }
}

#[test]
fn connecting_map_errors() {
    let c = germ("f_C");
    let s = germ("f_S");
    let small = vec![iv(-0.2, 0.2), iv(-0.2, 0.2)];
    assert!(matches!(
        connecting_map_on(&c, &small, &s, &Frontal::domain(&s), 1e-6),
        Err(MatchError::InclusionFailure { .. })
    ));
    // a doubled plane curve is not lift-injective
    let twice = PlaneCurve::<f64>::parse("loop", ["cos(t)", "sin(t)"], iv(-PI, 3.0 * PI)).unwrap();
    assert!(matches!(
        connecting_map(&twice, &twice, 1e-6),
        Err(MatchError::LiftNotInjective { .. })
    ));
}

fn nf() -> EdgeNormalForm<f64> {
    EdgeNormalForm::new(
        SpaceCurve::circle_arclength(1.0, iv(-2.0, 2.0)),
        ScalarFn::expr("0.3 + 0.1*sin(u)", &["u"], &[]).unwrap(),
        Some(ScalarFn::expr("1 + 0.2*v", &["u", "v"], &[]).unwrap()),
        Some(ScalarFn::Const(1.0)),
        0.15,
    )
    .unwrap()
}

#[test]
fn normal_form_matching() {
    let a = nf();
    let m = match_normal_forms(&a, &a, 1e-9).unwrap();
    assert_eq!((m.u_flip, m.sign), (false, 1));
    assert_abs_diff_eq!(m.shift, 0.0, epsilon = 1e-9);
    let m = match_normal_forms(&a, &a.t_flip(), 1e-9).unwrap();
    assert_eq!((m.u_flip, m.sign), (false, -1));
    let m = match_normal_forms(&a, &a.station_reversed(), 1e-9).unwrap();
    assert_eq!((m.u_flip, m.sign), (true, 1));
    let other = EdgeNormalForm::new(
        SpaceCurve::circle_arclength(2.0, iv(-2.0, 2.0)),
        ScalarFn::Const(0.3),
        Some(ScalarFn::Const(1.0)),
        Some(ScalarFn::Const(1.0)),
        0.15,
    )
    .unwrap();
    assert!(matches!(match_normal_forms(&a, &other, 1e-9), Err(MatchError::CreaseMismatch { .. })));
    let mut bent = a.clone();
    bent.b = Some(ScalarFn::Const(2.0));
    assert!(matches!(match_normal_forms(&a, &bent, 1e-9), Err(MatchError::NoSignFits { .. })));
    // the surfaces themselves agree under the recovered map
    let (g1, g2) = (from_normal_form(&a).unwrap(), from_normal_form(&a.t_flip()).unwrap());
    for (u, v) in [(0.3, 0.1), (-1.0, -0.05)] {
        assert!((g1.point(u, v).unwrap() - g2.point(u, -v).unwrap()).norm() < 1e-12);
    }
}

fn spliced() -> FnMap<f64, impl Fn(&[f64]) -> Result<Vec<f64>, NumError> + Send + Sync> {
    FnMap::new(1, 1, |x: &[f64]| {
        let a = x[0].abs();
        let s = if a <= 1.0 {
            0.0
        } else if a >= 2.0 {
            1.0
        } else {
            let t = a - 1.0;
            t * t * (3.0 - 2.0 * t)
        };
        Ok(vec![x[0] * s])
    })
}

#[test]
fn properness_examples() {
    let opts = ProbeOptions::default();
    assert_eq!((opts.r0, opts.levels, opts.grid), (0.5, 8, 4096));
    let gauss = MapDef::<f64>::parse("g", &["x"], &["x*exp(-x^2)"], &[]).unwrap();
    let r = properness_probe(&gauss, &[0.0], opts).unwrap();
    assert_eq!(r.verdict, Verdict::Finite);
    assert!(r.counts.iter().all(|&c| c == 1));
    let osc = MapDef::<f64>::parse("o", &["x"], &["x*sin(1/x)"], &[]).unwrap();
    let r = properness_probe(&osc, &[0.0], opts).unwrap();
    assert_eq!(r.verdict, Verdict::SuspectedInfinite, "{:?}", r.counts);
    assert!(*r.counts.last().unwrap() >= 64);
    let r = properness_probe(&spliced(), &[0.0], opts).unwrap();
    assert_eq!(r.verdict, Verdict::SuspectedInfinite);
    assert!(r.radii.windows(2).all(|w| w[1] < w[0]));
    // a surface germ: preimage of the origin under f_C is a point
    let fc = MapDef::<f64>::parse("fc", &["u", "v"], &["v^2", "v^3", "u"], &[]).unwrap();
    assert_eq!(properness_probe(&fc, &[0.0, 0.0], opts).unwrap().verdict, Verdict::Finite);
}
