//! Isometries of 3-space, distinguished planes and lines at a singular point,
//! and the four-way symmetry classifier.

use std::ops::Mul;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::scalar::{Real, V3};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("zero vector where a direction is required")]
    ZeroVector,
    #[error("frame is not orthonormal (defect {defect:e})")]
    FrameNotOrthonormal { defect: f64 },
}

/// 3×3 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3<T>(pub [[T; 3]; 3]);

impl<T: Real> Mat3<T> {
    pub fn identity() -> Self {
        Self::diag(T::one(), T::one(), T::one())
    }

    pub fn diag(a: T, b: T, c: T) -> Self {
        let z = T::zero();
        Mat3([[a, z, z], [z, b, z], [z, z, c]])
    }

    pub fn from_f64(m: [[f64; 3]; 3]) -> Self {
        Mat3(m.map(|r| r.map(T::lit)))
    }

    /// `a bᵀ`.
    pub fn outer(a: &V3<T>, b: &V3<T>) -> Self {
        let mut m = [[T::zero(); 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = a.0[i] * b.0[j];
            }
        }
        Mat3(m)
    }

    /// Matrix with the given columns.
    pub fn from_cols(a: &V3<T>, b: &V3<T>, c: &V3<T>) -> Self {
        Mat3([
            [a.0[0], b.0[0], c.0[0]],
            [a.0[1], b.0[1], c.0[1]],
            [a.0[2], b.0[2], c.0[2]],
        ])
    }

    pub fn transpose(&self) -> Self {
        let m = self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn scale(&self, k: T) -> Self {
        Mat3(self.0.map(|r| r.map(|x| x * k)))
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut m = self.0;
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = m[i][j] + o.0[i][j];
            }
        }
        Mat3(m)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-T::one()))
    }

    pub fn apply(&self, v: &V3<T>) -> V3<T> {
        let m = &self.0;
        V3([
            m[0][0] * v.0[0] + m[0][1] * v.0[1] + m[0][2] * v.0[2],
            m[1][0] * v.0[0] + m[1][1] * v.0[1] + m[1][2] * v.0[2],
            m[2][0] * v.0[0] + m[2][1] * v.0[1] + m[2][2] * v.0[2],
        ])
    }

    pub fn det(&self) -> T {
        let m = &self.0;
        crate::scalar::det3(
            &V3([m[0][0], m[1][0], m[2][0]]),
            &V3([m[0][1], m[1][1], m[2][1]]),
            &V3([m[0][2], m[1][2], m[2][2]]),
        )
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> T {
        self.0
            .iter()
            .flatten()
            .fold(T::zero(), |m, x| m.max(x.abs()))
    }

    /// Frobenius norm.
    pub fn norm(&self) -> T {
        self.0.iter().flatten().fold(T::zero(), |s, x| s + *x * *x).sqrt()
    }
}

impl<T: Real> Mul for Mat3<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut m = [[T::zero(); 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = (0..3).fold(T::zero(), |s, k| s + self.0[i][k] * o.0[k][j]);
            }
        }
        Mat3(m)
    }
}

/// `x ↦ Q x + b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Isometry<T> {
    pub q: Mat3<T>,
    pub b: V3<T>,
}

impl<T: Real> Isometry<T> {
    pub fn identity() -> Self {
        Isometry {
            q: Mat3::identity(),
            b: V3::zero(),
        }
    }

    pub fn linear(q: Mat3<T>) -> Self {
        Isometry { q, b: V3::zero() }
    }

    pub fn apply(&self, x: &V3<T>) -> V3<T> {
        self.q.apply(x) + self.b
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        Isometry {
            q: self.q * other.q,
            b: self.q.apply(&other.b) + self.b,
        }
    }

    /// ‖QᵀQ − I‖ (Frobenius).
    pub fn orthogonality_defect(&self) -> T {
        (self.q.transpose() * self.q).sub(&Mat3::identity()).norm()
    }

    /// ‖T² − I‖ on the linear part plus |Qb + b|.
    pub fn involution_defect(&self) -> T {
        let sq = self.compose(self);
        sq.q.sub(&Mat3::identity()).norm() + sq.b.norm()
    }

    /// Row-major `Q` followed by `b`.
    pub fn to_array(&self) -> [f64; 12] {
        let mut out = [0.0; 12];
        for i in 0..3 {
            for j in 0..3 {
                out[3 * i + j] = self.q.0[i][j].to_f64_lossy();
            }
            out[9 + i] = self.b.0[i].to_f64_lossy();
        }
        out
    }

    pub fn from_array(a: [f64; 12]) -> Self {
        let mut q = [[T::zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                q[i][j] = T::lit(a[3 * i + j]);
            }
        }
        Isometry {
            q: Mat3(q),
            b: V3::from_f64([a[9], a[10], a[11]]),
        }
    }
}

impl<T: Real> Serialize for Isometry<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_array().serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for Isometry<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(Isometry::from_array(<[f64; 12]>::deserialize(d)?))
    }
}

fn unit<T: Real>(v: V3<T>) -> Result<V3<T>, GeomError> {
    let n = v.norm();
    if !(n > T::zero()) || !n.is_finite() {
        return Err(GeomError::ZeroVector);
    }
    Ok(v.scale(T::one() / n))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane<T> {
    pub anchor: V3<T>,
    pub normal: V3<T>,
}

impl<T: Real> Plane<T> {
    pub fn new(anchor: V3<T>, normal: V3<T>) -> Result<Self, GeomError> {
        Ok(Plane {
            anchor,
            normal: unit(normal)?,
        })
    }

    pub fn signed_distance(&self, x: &V3<T>) -> T {
        (*x - self.anchor).dot(&self.normal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line<T> {
    pub anchor: V3<T>,
    pub direction: V3<T>,
}

impl<T: Real> Line<T> {
    pub fn new(anchor: V3<T>, direction: V3<T>) -> Result<Self, GeomError> {
        Ok(Line {
            anchor,
            direction: unit(direction)?,
        })
    }
}

/// Orthonormal frame at a singular point: tangent `t`, normal `nu`,
/// conormal `w = t × nu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GermFrame<T> {
    pub origin: V3<T>,
    pub t: V3<T>,
    pub nu: V3<T>,
    pub w: V3<T>,
}

impl<T: Real> GermFrame<T> {
    pub fn new(origin: V3<T>, t: V3<T>, nu: V3<T>) -> Result<Self, GeomError> {
        let f = GermFrame {
            origin,
            t,
            nu,
            w: t.cross(&nu),
        };
        let d = f.defect();
        if d > T::lit(1e-10) {
            return Err(GeomError::FrameNotOrthonormal { defect: d.to_f64_lossy() });
        }
        Ok(f)
    }

    fn defect(&self) -> T {
        let one = T::one();
        [
            (self.t.norm2() - one).abs(),
            (self.nu.norm2() - one).abs(),
            (self.w.norm2() - one).abs(),
            self.t.dot(&self.nu).abs(),
            self.t.dot(&self.w).abs(),
            self.nu.dot(&self.w).abs(),
        ]
        .into_iter()
        .fold(T::zero(), T::max)
    }

    /// Limiting tangent plane: normal `nu`.
    pub fn pi0(&self) -> Plane<T> {
        Plane {
            anchor: self.origin,
            normal: self.nu,
        }
    }

    /// Normal plane: normal `t`.
    pub fn pi1(&self) -> Plane<T> {
        Plane {
            anchor: self.origin,
            normal: self.t,
        }
    }

    /// Conormal plane `span{nu, t}`: normal `w`.
    pub fn pi2(&self) -> Plane<T> {
        Plane {
            anchor: self.origin,
            normal: self.w,
        }
    }

    /// Tangent line.
    pub fn l1(&self) -> Line<T> {
        Line {
            anchor: self.origin,
            direction: self.t,
        }
    }

    /// Conormal line `Π₀ ∩ Π₁`.
    pub fn l2(&self) -> Line<T> {
        Line {
            anchor: self.origin,
            direction: self.w,
        }
    }

    /// The four candidate symmetries in label order.
    pub fn candidates(&self) -> [(IsoLabel, Isometry<T>); 4] {
        [
            (IsoLabel::ReflPi0, make_reflection(&self.pi0())),
            (IsoLabel::ReflPi1, make_reflection(&self.pi1())),
            (IsoLabel::ReflPi2, make_reflection(&self.pi2())),
            (IsoLabel::Rot180L2, make_rotation180(&self.l2())),
        ]
    }
}

/// Reflection fixing `plane` pointwise.
pub fn make_reflection<T: Real>(plane: &Plane<T>) -> Isometry<T> {
    let n = plane.normal;
    let q = Mat3::identity().sub(&Mat3::outer(&n, &n).scale(T::lit(2.0)));
    let b = n.scale(T::lit(2.0) * n.dot(&plane.anchor));
    Isometry { q, b }
}

/// Half-turn about `line`.
pub fn make_rotation180<T: Real>(line: &Line<T>) -> Isometry<T> {
    let d = line.direction;
    let q = Mat3::outer(&d, &d).scale(T::lit(2.0)).sub(&Mat3::identity());
    let b = line.anchor - q.apply(&line.anchor);
    Isometry { q, b }
}

pub fn is_involution<T: Real>(t: &Isometry<T>, tol: T) -> bool {
    t.involution_defect() <= tol
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IsoLabel {
    Identity,
    #[serde(rename = "refl_Pi0")]
    ReflPi0,
    #[serde(rename = "refl_Pi1")]
    ReflPi1,
    #[serde(rename = "refl_Pi2")]
    ReflPi2,
    #[serde(rename = "rot180_l2")]
    Rot180L2,
    Other,
}

impl IsoLabel {
    /// Roman numeral of the symmetry case, if any.
    pub fn case(self) -> Option<&'static str> {
        match self {
            IsoLabel::ReflPi0 => Some("i"),
            IsoLabel::ReflPi1 => Some("ii"),
            IsoLabel::ReflPi2 => Some("iii"),
            IsoLabel::Rot180L2 => Some("iv"),
            _ => None,
        }
    }
}

fn iso_close<T: Real>(a: &Isometry<T>, b: &Isometry<T>, tol: T) -> bool {
    a.q.sub(&b.q).max_abs() <= tol && (a.b - b.b).max_abs() <= tol
}

/// Labels `t` against the candidates built from `frame`, entrywise within `tol`.
pub fn classify_isometry<T: Real>(t: &Isometry<T>, frame: &GermFrame<T>, tol: T) -> Result<IsoLabel, GeomError> {
    let d = frame.defect();
    if d > T::lit(1e-8).max(tol) {
        return Err(GeomError::FrameNotOrthonormal { defect: d.to_f64_lossy() });
    }
    if (t.apply(&frame.origin) - frame.origin).max_abs() > tol {
        return Ok(IsoLabel::Other);
    }
    if iso_close(t, &Isometry::identity(), tol) {
        return Ok(IsoLabel::Identity);
    }
    Ok(frame
        .candidates()
        .into_iter()
        .find(|(_, c)| iso_close(t, c, tol))
        .map_or(IsoLabel::Other, |(l, _)| l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(x: f64, y: f64, z: f64) -> V3<f64> {
        V3::new(x, y, z)
    }

    #[test]
    fn coordinate_reflections() {
        let y0 = make_reflection(&Plane::new(V3::zero(), v(0.0, 1.0, 0.0)).unwrap());
        assert_eq!(y0.q, Mat3::diag(1.0, -1.0, 1.0));
        assert_eq!(y0.b, V3::zero());
        let z0 = make_reflection(&Plane::new(V3::zero(), v(0.0, 0.0, 1.0)).unwrap());
        assert_eq!(z0.q, Mat3::diag(1.0, 1.0, -1.0));
        let twice = y0.compose(&y0);
        assert_eq!(twice, Isometry::identity());
    }

    #[test]
    fn offset_plane_is_fixed() {
        let p = Plane::new(v(1.0, 2.0, 3.0), v(1.0, 1.0, 0.0)).unwrap();
        let r = make_reflection(&p);
        let x = v(1.5, 1.5, -2.0);
        assert!((r.apply(&x) - x).max_abs() < 1e-15);
        assert!(is_involution(&r, 1e-12));
    }

    #[test]
    fn half_turns() {
        let x = make_rotation180(&Line::new(V3::zero(), v(1.0, 0.0, 0.0)).unwrap());
        assert_eq!(x.q, Mat3::diag(1.0, -1.0, -1.0));
        assert_eq!(x.compose(&x), Isometry::identity());
        let z = make_rotation180(&Line::new(V3::zero(), v(0.0, 0.0, 1.0)).unwrap());
        assert_eq!(z.q, Mat3::diag(-1.0, -1.0, 1.0));
    }

    #[test]
    fn classifies_the_worked_examples() {
        let frame = GermFrame::new(V3::zero(), v(0.0, 0.0, 1.0), v(0.0, 1.0, 0.0)).unwrap();
        let t2 = Isometry::linear(Mat3::diag(1.0, -1.0, 1.0));
        assert_eq!(classify_isometry(&t2, &frame, 1e-8).unwrap(), IsoLabel::ReflPi0);
        let t3 = Isometry::linear(Mat3::diag(1.0, -1.0, -1.0));
        assert_eq!(classify_isometry(&t3, &frame, 1e-8).unwrap(), IsoLabel::Rot180L2);
        let sw = GermFrame::new(V3::zero(), v(0.0, 0.0, 1.0), v(1.0, 0.0, 0.0)).unwrap();
        assert_eq!(classify_isometry(&t2, &sw, 1e-8).unwrap(), IsoLabel::ReflPi2);
    }

    #[test]
    fn non_involutions_and_movers() {
        let rot90 = Isometry::linear(Mat3::from_f64([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]));
        assert!(!is_involution(&rot90, 1e-10));
        assert!(is_involution(&Isometry::linear(Mat3::diag(1.0, -1.0, 1.0)), 1e-12));
        let frame = GermFrame::new(V3::zero(), v(0.0, 0.0, 1.0), v(0.0, 1.0, 0.0)).unwrap();
        assert_eq!(classify_isometry(&rot90, &frame, 1e-8).unwrap(), IsoLabel::Other);
        let shift = Isometry {
            q: Mat3::identity(),
            b: v(1.0, 0.0, 0.0),
        };
        assert_eq!(classify_isometry(&shift, &frame, 1e-8).unwrap(), IsoLabel::Other);
        assert!(GermFrame::new(V3::zero(), v(0.0, 0.0, 1.0), v(0.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn serializes_as_twelve_reals() {
        let r = make_rotation180(&Line::new(v(0.0, 1.0, 0.0), v(1.0, 0.0, 0.0)).unwrap());
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(s, "[1.0,0.0,0.0,0.0,-1.0,0.0,0.0,0.0,-1.0,0.0,2.0,0.0]");
        let back: Isometry<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }

    fn random_frame(a: f64, b: f64, c: f64, origin: [f64; 3]) -> GermFrame<f64> {
        // orthonormal pair from Euler angles
        let (sa, ca, sb, cb, sc, cc) = (a.sin(), a.cos(), b.sin(), b.cos(), c.sin(), c.cos());
        let r = Mat3::from_f64([
            [ca * cb, ca * sb * sc - sa * cc, ca * sb * cc + sa * sc],
            [sa * cb, sa * sb * sc + ca * cc, sa * sb * cc - ca * sc],
            [-sb, cb * sc, cb * cc],
        ]);
        let t = r.apply(&v(1.0, 0.0, 0.0));
        let nu = r.apply(&v(0.0, 1.0, 0.0));
        GermFrame::new(V3::from_f64(origin), t, nu).unwrap()
    }

    proptest! {
        #[test]
        fn candidates_are_distinct_involutions(a in -3.0f64..3.0, b in -1.5f64..1.5, c in -3.0f64..3.0,
                                               o in proptest::array::uniform3(-2.0f64..2.0)) {
            let f = random_frame(a, b, c, o);
            let cands = f.candidates();
            for (i, (label, iso)) in cands.iter().enumerate() {
                prop_assert!(is_involution(iso, 1e-10));
                prop_assert_eq!(classify_isometry(iso, &f, 1e-8).unwrap(), *label);
                for (_, other) in &cands[i + 1..] {
                    prop_assert!(!iso_close(iso, other, 1e-3));
                }
            }
            let composed = cands[0].1.compose(&cands[1].1);
            prop_assert!(iso_close(&composed, &cands[3].1, 1e-12));
        }
    }
}
