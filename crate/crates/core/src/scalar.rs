//! Scalar abstractions.
//!
//! [`Real`] is the floating point type the whole crate is generic over
//! (`f32` or `f64`). [`Scalar`] is anything that behaves like a real number
//! under arithmetic and the elementary functions: a plain `Real`, or a
//! truncated Taylor [`Jet`](crate::numkit::Jet) carrying derivatives along.

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point: f32 or f64.
pub trait Real:
    Float + FloatConst + serde::Serialize + serde::de::DeserializeOwned + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into this type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// A number that supports arithmetic and the elementary functions used by
/// the expression language.
pub trait Scalar<T: Real>:
    Copy
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<T, Output = Self>
    + Sub<T, Output = Self>
    + Mul<T, Output = Self>
    + Div<T, Output = Self>
{
    fn from_real(x: T) -> Self;
    /// The value (constant Taylor term).
    fn re(&self) -> T;
    /// True when every derivative carried by the number vanishes.
    fn is_constant(&self) -> bool;

    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn atan(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn powf(self, p: T) -> Self;

    fn recip(self) -> Self {
        Self::from_real(T::one()) / self
    }

    fn abs(self) -> Self {
        if self.re() < T::zero() {
            -self
        } else {
            self
        }
    }
}

impl<T: Real> Scalar<T> for T {
    #[inline]
    fn from_real(x: T) -> Self {
        x
    }
    #[inline]
    fn re(&self) -> T {
        *self
    }
    #[inline]
    fn is_constant(&self) -> bool {
        true
    }
    #[inline]
    fn sin(self) -> Self {
        Float::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        Float::cos(self)
    }
    #[inline]
    fn tan(self) -> Self {
        Float::tan(self)
    }
    #[inline]
    fn exp(self) -> Self {
        Float::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        Float::ln(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        Float::sqrt(self)
    }
    #[inline]
    fn atan(self) -> Self {
        Float::atan(self)
    }
    #[inline]
    fn powi(self, n: i32) -> Self {
        Float::powi(self, n)
    }
    #[inline]
    fn powf(self, p: T) -> Self {
        Float::powf(self, p)
    }
}

/// Small fixed-size 3-vector over any [`Scalar`].
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct V3<S>(pub [S; 3]);

impl<S: Copy> V3<S> {
    pub fn new(x: S, y: S, z: S) -> Self {
        V3([x, y, z])
    }
    pub fn x(&self) -> S {
        self.0[0]
    }
    pub fn y(&self) -> S {
        self.0[1]
    }
    pub fn z(&self) -> S {
        self.0[2]
    }
    pub fn map<R: Copy>(&self, f: impl Fn(S) -> R) -> V3<R> {
        V3([f(self.0[0]), f(self.0[1]), f(self.0[2])])
    }
}

impl<T: Real> V3<T> {
    pub fn zero() -> Self {
        V3([T::zero(); 3])
    }
    pub fn from_f64(v: [f64; 3]) -> Self {
        V3([T::lit(v[0]), T::lit(v[1]), T::lit(v[2])])
    }
    pub fn to_f64(&self) -> [f64; 3] {
        [self.0[0].to_f64_lossy(), self.0[1].to_f64_lossy(), self.0[2].to_f64_lossy()]
    }
    pub fn max_abs(&self) -> T {
        self.0[0].abs().max(self.0[1].abs()).max(self.0[2].abs())
    }
    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }
}

impl<S: Copy + Add<Output = S> + Sub<Output = S> + Mul<Output = S>> V3<S> {
    pub fn dot(&self, o: &Self) -> S {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }
    pub fn cross(&self, o: &Self) -> Self {
        let [a, b, c] = self.0;
        let [x, y, z] = o.0;
        V3([b * z - c * y, c * x - a * z, a * y - b * x])
    }
    pub fn scale(&self, k: S) -> Self {
        V3([self.0[0] * k, self.0[1] * k, self.0[2] * k])
    }
    pub fn norm2(&self) -> S {
        self.dot(self)
    }
}

impl<S> V3<S> {
    pub fn norm<T: Real>(&self) -> S
    where
        S: Scalar<T>,
    {
        self.norm2().sqrt()
    }

    pub fn normalized<T: Real>(&self) -> Self
    where
        S: Scalar<T>,
    {
        let n = self.norm();
        V3([self.0[0] / n, self.0[1] / n, self.0[2] / n])
    }

    pub fn re<T: Real>(&self) -> V3<T>
    where
        S: Scalar<T>,
    {
        V3([self.0[0].re(), self.0[1].re(), self.0[2].re()])
    }

    pub fn lift<T: Real>(v: V3<T>) -> Self
    where
        S: Scalar<T>,
    {
        V3([S::from_real(v.0[0]), S::from_real(v.0[1]), S::from_real(v.0[2])])
    }
}

/// Determinant of the 3×3 matrix with columns `a`, `b`, `c`.
pub fn det3<S: Copy + Add<Output = S> + Sub<Output = S> + Mul<Output = S>>(
    a: &V3<S>,
    b: &V3<S>,
    c: &V3<S>,
) -> S {
    a.dot(&b.cross(c))
}

impl<S: Copy + Add<Output = S>> Add for V3<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        V3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl<S: Copy + Sub<Output = S>> Sub for V3<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        V3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl<S: Copy + Neg<Output = S>> Neg for V3<S> {
    type Output = Self;
    fn neg(self) -> Self {
        V3([-self.0[0], -self.0[1], -self.0[2]])
    }
}
