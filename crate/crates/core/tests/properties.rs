//! Property tests over randomised inputs.

use frontal_core::exprlang::MapDef;
use frontal_core::geom::{Isometry, Mat3};
use frontal_core::isomer::{congruence_count, dual, SymmetryPredicates};
use frontal_core::normalform::{EdgeNormalForm, ScalarFn};
use frontal_core::numkit::{integrate, Evaluable, Interval, Jet};
use frontal_core::curve::SpaceCurve;
use proptest::prelude::*;

fn map() -> MapDef<f64> {
    MapDef::parse("m", &["u", "v"], &["sin(u)*exp(v) + u^3*v", "cos(u*v)", "sqrt(2 + u^2)"], &[]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jets_agree_with_central_differences(u in -1.0f64..1.0, v in -1.0f64..1.0) {
        let m = map();
        let x = [Jet::variable(u, 0, 2, 2), Jet::variable(v, 1, 2, 2)];
        let j = m.eval_jet(&x).unwrap().unwrap();
        let h = 1e-5;
        for k in 0..3 {
            let f = |a: f64, b: f64| m.eval(&[a, b]).unwrap()[k];
            let du = (f(u + h, v) - f(u - h, v)) / (2.0 * h);
            let dv = (f(u, v + h) - f(u, v - h)) / (2.0 * h);
            prop_assert!((j[k].partial(1, 0) - du).abs() < 1e-7);
            prop_assert!((j[k].partial(0, 1) - dv).abs() < 1e-7);
            prop_assert!((j[k].value() - f(u, v)).abs() < 1e-14);
        }
    }

    #[test]
    fn dual_is_an_involution(theta in prop_oneof![-1.4f64..-0.05, 0.05f64..1.4], slope in -0.2f64..0.2) {
        let src = format!("{theta} + {slope}*sin(u)");
        let nf: EdgeNormalForm<f64> = EdgeNormalForm::new(
            SpaceCurve::circle_arclength(1.0, Interval::new(-1.0, 1.0)),
            ScalarFn::expr(&src, &["u"], &[]).unwrap(),
            None,
            None,
            0.1,
        ).unwrap();
        if let Ok(d) = dual(&nf) {
            let dd = dual(&d).unwrap();
            for u in nf.stations(9) {
                prop_assert_eq!(dd.theta_at(u).unwrap(), nf.theta_at(u).unwrap());
                let (a, b) = (nf.edge_invariants(u).unwrap(), d.edge_invariants(u).unwrap());
                prop_assert!((a.kappa_s - b.kappa_s).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reflections_square_to_identity(a in any::<bool>(), b in any::<bool>(), c in any::<bool>()) {
        let s = |x: bool| if x { -1.0 } else { 1.0 };
        let t = Isometry::linear(Mat3::diag(s(a), s(b), s(c)));
        prop_assert!(t.involution_defect() < 1e-15);
        prop_assert!(t.compose(&t).q.sub(&Mat3::identity()).max_abs() < 1e-15);
    }

    #[test]
    fn quadrature_of_polynomials(lo in -2.0f64..0.0, hi in 0.0f64..2.0, c in -3.0f64..3.0) {
        let got = integrate(|x: f64| c * x * x + x, Interval::new(lo, hi), 1e-12).unwrap();
        let want = c * (hi.powi(3) - lo.powi(3)) / 3.0 + (hi * hi - lo * lo) / 2.0;
        prop_assert!((got - want).abs() < 1e-10);
    }
}

#[test]
fn congruence_counts_are_bounded() {
    for p in SymmetryPredicates::all() {
        let (n, exact) = congruence_count(&p);
        assert!(n == 4 || n <= 2);
        assert!(exact || n == 2);
    }
}
