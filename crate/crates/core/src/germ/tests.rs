use super::*;
use approx::assert_abs_diff_eq;
use proptest::prelude::*;

fn germ(name: &str) -> SurfaceGerm<f64> {
    by_name(name).unwrap()
}

fn close(a: V3<f64>, b: V3<f64>, eps: f64) -> bool {
    (a - b).norm() < eps
}

#[test]
fn catalog_normals_at_origin() {
    assert!(close(germ("f_C").normal(0.0, 0.0).unwrap(), V3::new(0.0, 1.0, 0.0), 1e-15));
    assert!(close(germ("f_S").normal(0.0, 0.0).unwrap(), V3::new(1.0, 0.0, 0.0), 1e-15));
    assert!(close(germ("plane").normal(0.3, -0.2).unwrap(), V3::new(0.0, 0.0, 1.0), 1e-15));
}

#[test]
fn limit_normal_matches_closed_form() {
    let g = SurfaceGerm::<f64>::parse("fc", ["v^2", "v^3", "u"], &[], Rect::square(1.0)).unwrap();
    let n0 = g.normal(0.0, 0.0).unwrap();
    assert!(close(n0, V3::new(0.0, 1.0, 0.0), 1e-9), "{n0:?}");
    for &(u, v) in &[(0.2, 0.3), (-0.4, -0.1), (0.1, 0.0)] {
        let n = g.normal(u, v).unwrap();
        let expect = V3::new(-3.0 * v, 2.0, 0.0).normalized();
        assert!(close(n, expect, 1e-9), "{u} {v}: {n:?}");
    }
}

#[test]
fn cross_cap_is_not_a_frontal() {
    let g = germ("cross_cap");
    assert!(matches!(g.normal(0.0, 0.0), Err(GermError::NotAFrontal { .. })));
    assert!(g.normal(0.3, 0.2).is_ok());
}

#[test]
fn normals_annihilate_tangents_on_catalog() {
    let mut all: Vec<SurfaceGerm<f64>> = ["f_C", "f_S", "f_CW", "ccr_example", "sw_example", "plane"]
        .iter()
        .map(|n| germ(n))
        .collect();
    all.push(ms_edge("u^2", "1", "u", "1").unwrap());
    all.push(sw_example(0.7, -1.3).unwrap());
    for g in &all {
        for p in g.domain().grid(17, 17) {
            let n = g.normal(p[0], p[1]).unwrap();
            let (fu, fv) = g.tangents(p[0], p[1]).unwrap();
            assert_abs_diff_eq!(n.norm(), 1.0, epsilon = 1e-10);
            assert!(n.dot(&fu).abs() < 1e-8, "{} at {p:?}", g.name());
            assert!(n.dot(&fv).abs() < 1e-8, "{} at {p:?}", g.name());
        }
    }
}

#[test]
fn area_density_oracles() {
    let g = germ("f_C");
    assert_eq!(g.area_density(0.0, 0.0).unwrap(), 0.0);
    assert_abs_diff_eq!(g.area_density(0.0, 1.0).unwrap(), 13f64.sqrt(), epsilon = 1e-14);
    assert_abs_diff_eq!(13f64.sqrt(), 3.605551, epsilon = 1e-6);
    for v in [-0.7, -0.1, 0.2, 0.9] {
        let l = g.area_density(0.4, v).unwrap();
        assert_abs_diff_eq!(l, v * (4.0 + 9.0 * v * v).sqrt(), epsilon = 1e-14);
    }
    // sign change across the singular curve
    assert!(g.area_density(0.1, -0.01).unwrap() < 0.0 && g.area_density(0.1, 0.01).unwrap() > 0.0);
    assert_abs_diff_eq!(germ("plane").area_density(0.5, 0.5).unwrap(), 1.0);
}

#[test]
fn cuspidal_edge_singular_curve() {
    let c = germ("f_C").singular_curve(1e-8).unwrap();
    assert_eq!(c.branches.len(), 1);
    assert!(c.len() > 200);
    for s in c.samples() {
        assert!(s.point[1].abs() < 1e-12);
        assert!(s.nondegenerate);
        assert_eq!(s.kind, SingularType::I);
        assert_abs_diff_eq!(s.null_dir[1], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.grad[1], 2.0, epsilon = 1e-8);
    }
}

#[test]
fn swallowtail_singular_curve() {
    let c = germ("f_S").singular_curve(1e-8).unwrap();
    let mut origin = 0;
    for s in c.samples() {
        let [u, v] = s.point;
        assert!((u + 6.0 * v * v).abs() < 1e-8, "{u} {v}");
        if u.abs() < 1e-14 && v.abs() < 1e-14 {
            origin += 1;
            assert_eq!(s.kind, SingularType::II);
        } else {
            assert_eq!(s.kind, SingularType::I, "{u} {v}");
        }
    }
    assert_eq!(origin, 1);
}

#[test]
fn other_singular_sets() {
    assert!(germ("plane").singular_curve(1e-8).unwrap().is_empty());
    for s in germ("f_CW").singular_curve(1e-8).unwrap().samples() {
        assert!(s.point[1].abs() < 1e-12);
    }
    let sw = germ("sw_example").singular_curve(1e-8).unwrap();
    for s in sw.samples() {
        assert!(s.point[0].abs() < 1e-10);
    }
    let at0 = sw.samples().find(|s| s.point[1].abs() < 1e-14).unwrap();
    assert_eq!(at0.kind, SingularType::II);
}

#[test]
fn limiting_normal_curvature_examples() {
    let k = germ("ccr_example").limiting_normal_curvature(0.0, 0.0).unwrap();
    assert_abs_diff_eq!(k.abs(), 2.0, epsilon = 1e-8);
    assert!(germ("f_C").limiting_normal_curvature(0.0, 0.0).unwrap().abs() < 1e-10);
    assert!(germ("f_CW").limiting_normal_curvature(0.0, 0.0).unwrap().abs() < 1e-10);
    assert!(matches!(
        germ("f_S").limiting_normal_curvature(0.0, 0.0),
        Err(GermError::TypeII { .. })
    ));
    // b0(0) ≠ 0 bends the edge out of the limiting tangent plane
    let ms = ms_edge::<f64>("0", "1", "0", "1").unwrap();
    assert_abs_diff_eq!(ms.limiting_normal_curvature(0.0, 0.0).unwrap().abs(), 2.0, epsilon = 1e-8);
    let flat = ms_edge::<f64>("0", "0", "u", "1").unwrap();
    assert!(flat.limiting_normal_curvature(0.0, 0.0).unwrap().abs() < 1e-10);
}

fn normal_of(p: &crate::geom::Plane<f64>) -> V3<f64> {
    p.normal
}

fn parallel(a: V3<f64>, b: V3<f64>) -> bool {
    a.cross(&b).norm() < 1e-12 && a.norm() > 0.0
}

#[test]
fn distinguished_frames() {
    let f = germ("f_C").base_frame().unwrap();
    assert!(parallel(normal_of(&f.frame.pi0()), V3::new(0.0, 1.0, 0.0)));
    assert!(parallel(normal_of(&f.frame.pi1()), V3::new(0.0, 0.0, 1.0)));
    assert!(parallel(normal_of(&f.frame.pi2()), V3::new(1.0, 0.0, 0.0)));
    assert!(parallel(f.frame.l2().direction, V3::new(1.0, 0.0, 0.0)));
    assert!(close(f.cuspidal_direction.unwrap(), V3::new(1.0, 0.0, 0.0), 1e-14));

    let s = germ("f_S").base_frame().unwrap();
    assert!(parallel(normal_of(&s.frame.pi2()), V3::new(0.0, 1.0, 0.0)));

    let cw = germ("f_CW").base_frame().unwrap();
    assert!(parallel(normal_of(&cw.frame.pi0()), V3::new(0.0, 1.0, 0.0)));
    assert!(parallel(normal_of(&cw.frame.pi1()), V3::new(0.0, 0.0, 1.0)));

    assert!(matches!(germ("plane").base_frame(), Err(GermError::RegularPoint { .. })));
}

#[test]
fn frame_after_domain_rotation() {
    // f_C in rotated coordinates: null direction is no longer ∂_v
    let g = SurfaceGerm::<f64>::parse(
        "rot",
        ["(0.6*u + 0.8*v)^2", "(0.6*u + 0.8*v)^3", "-0.8*u + 0.6*v"],
        &[],
        Rect::square(1.0),
    )
    .unwrap()
    .with_normal_exprs(["-3*(0.6*u + 0.8*v)", "2", "0"], &[])
    .unwrap();
    let f = g.base_frame().unwrap();
    assert_abs_diff_eq!(f.null_dir[0], 0.6, epsilon = 1e-12);
    assert_abs_diff_eq!(f.null_dir[1], 0.8, epsilon = 1e-12);
    assert!(parallel(f.frame.t, V3::new(0.0, 0.0, 1.0)));
    assert!(close(f.cuspidal_direction.unwrap(), V3::new(1.0, 0.0, 0.0), 1e-12));
}

#[test]
fn fundamental_forms() {
    assert_eq!(germ("plane").first_fundamental_form(0.2, 0.1).unwrap(), (1.0, 0.0, 1.0));
    let (e, f, g) = germ("f_C").first_fundamental_form(0.3, 0.5).unwrap();
    assert_abs_diff_eq!(e, 1.0);
    assert_abs_diff_eq!(f, 0.0);
    assert_abs_diff_eq!(g, 4.0 * 0.25 + 9.0 * 0.0625, epsilon = 1e-14);
}

proptest! {
    #[test]
    fn gram_matrix_is_positive(u in -1.0f64..1.0, v in -1.0f64..1.0, which in 0usize..5) {
        let g = germ(["f_C", "f_S", "f_CW", "ccr_example", "sw_example"][which]);
        let (e, f, gg) = g.first_fundamental_form(u, v).unwrap();
        prop_assert!(e >= 0.0 && gg >= 0.0);
        prop_assert!(e * gg - f * f >= -1e-12 * (1.0 + e * gg));
    }
}
