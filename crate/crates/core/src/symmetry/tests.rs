use super::*;
use crate::geom::Mat3;
use crate::germ::{by_name, sw_example};

const TOL: f64 = 1e-6;

fn germ(name: &str) -> SurfaceGerm<f64> {
    by_name(name).unwrap()
}

fn diag(a: f64, b: f64, c: f64) -> Isometry<f64> {
    Isometry::linear(Mat3::diag(a, b, c))
}

fn same_iso(a: &Isometry<f64>, b: &Isometry<f64>) -> bool {
    a.q.sub(&b.q).max_abs() < 1e-10 && a.b.norm() < 1e-10 && b.b.norm() < 1e-10
}

fn psi_matches(inv: &Involution<f64>, want: impl Fn(f64, f64) -> [f64; 2]) -> f64 {
    inv.map
        .samples
        .iter()
        .map(|s| {
            let w = want(s.x[0], s.x[1]);
            (s.psi[0] - w[0]).abs().max((s.psi[1] - w[1]).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn cuspidal_edge_symmetries() {
    let r = detect_symmetries(&germ("f_C"), [0.0, 0.0], TOL).unwrap();
    assert_eq!(r.cases(), vec!["i", "ii", "iv"]);
    assert!(r.valid(), "{:#?}", r.validation);
    let want = [
        (IsoLabel::ReflPi0, diag(1.0, -1.0, 1.0)),
        (IsoLabel::ReflPi1, diag(1.0, 1.0, -1.0)),
        (IsoLabel::Rot180L2, diag(1.0, -1.0, -1.0)),
    ];
    for (l, t) in want {
        let f = r.finding(l).unwrap();
        assert!(same_iso(&f.isometry, &t), "{l:?}");
        assert!(f.residual < TOL);
        let psi = f.psi.as_ref().unwrap();
        assert!(psi.involution_defect < TOL && psi.equivariance_defect < TOL);
        // edges: ψ reverses orientation and the singular curve
        if l == IsoLabel::ReflPi1 {
            assert!(!psi.orientation.preserves_orientation);
            assert_eq!(psi.orientation.reverses_singular_curve, Some(true));
            assert!(psi_matches(psi, |u, v| [-u, v]) < 1e-6);
        }
    }
    assert!(r.kappa_nu.unwrap().abs() < 1e-10);
}

#[test]
fn swallowtail_has_only_conormal_reflection() {
    let r = detect_symmetries(&germ("f_S"), [0.0, 0.0], TOL).unwrap();
    assert_eq!(r.cases(), vec!["iii"]);
    assert!(r.valid(), "{:#?}", r.validation);
    let f = &r.findings[0];
    assert!(same_iso(&f.isometry, &diag(1.0, -1.0, 1.0)));
    assert!(psi_matches(f.psi.as_ref().unwrap(), |u, v| [u, -v]) < 1e-6);
    assert!(r.rejected.iter().all(|x| x.distance > 1e-3));
}

#[test]
fn cuspidal_cross_cap_with_curved_edge() {
    let r = detect_symmetries(&germ("ccr_example"), [0.0, 0.0], TOL).unwrap();
    assert_eq!(r.cases(), vec!["ii"]);
    assert!(same_iso(&r.findings[0].isometry, &diag(-1.0, 1.0, 1.0)));
    assert!((r.kappa_nu.unwrap().abs() - 2.0).abs() < 1e-8);
    assert!(r.valid());
    let psi = r.findings[0].psi.as_ref().unwrap();
    assert!(psi_matches(psi, |u, v| [-u, -v]) < 1e-6);
    assert!(psi.orientation.preserves_orientation);
    assert_eq!(psi.orientation.reverses_singular_curve, Some(true));
}

#[test]
fn standard_cuspidal_cross_cap_is_closed_under_composition() {
    // Both frame reflections fix the image, so their composite, the
    // half-turn about the conormal line, does too.
    let g = germ("f_CW");
    let r = detect_symmetries(&g, [0.0, 0.0], TOL).unwrap();
    assert_eq!(r.cases(), vec!["i", "ii", "iv"]);
    let p = [0.3, -0.4];
    let rot = diag(1.0, -1.0, -1.0);
    let lhs = rot.apply(&g.point(p[0], p[1]).unwrap());
    assert!((lhs - g.point(-p[0], p[1]).unwrap()).norm() < 1e-15);
}

#[test]
fn sw_example_symmetry_is_conormal() {
    let g = sw_example::<f64>(1.0, 1.0).unwrap();
    let r = detect_symmetries(&g, [0.0, 0.0], TOL).unwrap();
    assert_eq!(r.cases(), vec!["iii"]);
    // the singular image lies in the xz-plane, which is the mirror
    let t = &r.findings[0].isometry;
    assert!(same_iso(t, &diag(1.0, -1.0, 1.0)));
}

#[test]
fn identity_involution_and_brute_mode() {
    let g = germ("f_C");
    let inv = connecting_involution(&g, [0.0, 0.0], &Isometry::identity(), TOL).unwrap();
    assert!(psi_matches(&inv, |u, v| [u, v]) < 1e-9);
    let id = test_isometry(&g, [0.0, 0.0], &Isometry::identity(), TOL).unwrap().unwrap();
    assert_eq!(id.label, IsoLabel::Identity);
    let other = test_isometry(&g, [0.0, 0.0], &diag(-1.0, 1.0, 1.0), TOL).unwrap();
    assert!(other.is_none());
    assert!(matches!(
        detect_symmetries(&germ("plane"), [0.0, 0.0], TOL),
        Err(SymmetryError::Unsupported(GermKind::Regular))
    ));
}

#[test]
fn swallowtail_double_points_lie_on_parabola() {
    let g = germ("f_S");
    let locus = self_intersections(&g, &g.domain(), 1e-12).unwrap();
    assert!(locus.pairs.len() > 10);
    for q in locus.preimages() {
        assert!((q[0] + 2.0 * q[1] * q[1]).abs() < 1e-8, "{q:?}");
    }
    let r = detect_symmetries(&g, [0.0, 0.0], TOL).unwrap();
    let c2 = verify_c2(&g, [0.0, 0.0], &r.findings[0], &locus, 1e-8).unwrap();
    assert!(c2.passed() && !c2.vacuous, "{c2:#?}");
}

#[test]
fn cuspidal_cross_cap_double_points() {
    let g = germ("f_CW");
    let locus = self_intersections(&g, &g.domain(), 1e-12).unwrap();
    assert!(!locus.is_empty());
    for (pair, x) in locus.pairs.iter().zip(&locus.image) {
        assert!(pair[0][0].abs() < 1e-8 && pair[1][0].abs() < 1e-8);
        assert!((pair[0][1] + pair[1][1]).abs() < 1e-8);
        assert!(x.0[0] > 0.0 && x.0[1].abs() < 1e-8 && x.0[2].abs() < 1e-8);
    }
    let r = detect_symmetries(&g, [0.0, 0.0], TOL).unwrap();
    let pi1 = r.finding(IsoLabel::ReflPi1).unwrap();
    let c2 = verify_c2(&g, [0.0, 0.0], pi1, &locus, 1e-8).unwrap();
    assert!(c2.passed(), "{c2:#?}");
    // the half-turn's involution (u, v) ↦ (−u, v) fixes every double point
    let rot = r.finding(IsoLabel::Rot180L2).unwrap();
    let c2 = verify_c2(&g, [0.0, 0.0], rot, &locus, 1e-8).unwrap();
    assert!(!c2.check("psi_fixes_only_base").unwrap().passed);
}

#[test]
fn injective_germ_has_no_double_points() {
    let g = germ("f_C");
    let locus = self_intersections(&g, &g.domain(), 1e-12).unwrap();
    assert!(locus.is_empty(), "{:?}", &locus.pairs[..locus.pairs.len().min(3)]);
    let r = detect_symmetries(&g, [0.0, 0.0], TOL).unwrap();
    let c2 = verify_c2(&g, [0.0, 0.0], &r.findings[0], &locus, 1e-8).unwrap();
    assert!(c2.vacuous && c2.passed());
}

#[test]
fn parity_conditions() {
    let pos = ms_symmetry_check("u^2", "1", "u", "1", TOL).unwrap();
    assert!(pos.parities_hold());
    assert!(pos.kappa_nu_nonzero);
    let f = pos.normal_plane_symmetry.as_ref().unwrap();
    assert!(same_iso(&f.isometry, &diag(-1.0, 1.0, 1.0)));
    assert!(psi_matches(f.psi.as_ref().unwrap(), |u, v| [-u, v]) < 1e-6);
    let neg = ms_symmetry_check("u^2", "1", "u^2", "1", TOL).unwrap();
    assert!(!neg.b2_odd && !neg.parities_hold());
    assert!(neg.normal_plane_symmetry.is_none());
    let flat = ms_symmetry_check("u^2", "0", "u", "1", TOL).unwrap();
    assert!(!flat.kappa_nu_nonzero);
    assert_eq!(ms_symmetry_check("0", "1", "u", "v", TOL).unwrap_err(), SymmetryError::DegenerateCubic);
}
