use std::sync::Arc;

use serde::Serialize;

use crate::exprlang::MapDef;
use crate::geom::Isometry;
use crate::germ::SurfaceGerm;
use crate::numkit::{map_jets, Evaluable, Interval, Jet, MAX_ORDER};
use crate::scalar::{Real, V3};

use super::MatchError;

/// A map with a continuous unit normal: a surface in 3-space or a plane
/// curve.
pub trait Frontal<T: Real>: Send + Sync {
    fn arity(&self) -> usize;
    fn dim(&self) -> usize;
    fn domain(&self) -> Vec<Interval<T>>;
    fn point(&self, x: &[T]) -> Result<Vec<T>, MatchError>;
    fn normal(&self, x: &[T]) -> Result<Vec<T>, MatchError>;
}

/// A point of the Legendrian lift `(f, ν)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiftSample<T> {
    pub x: Vec<T>,
    pub fx: Vec<T>,
    pub nu: Vec<T>,
}

pub fn legendrian_lift<T: Real>(f: &dyn Frontal<T>, x: &[T]) -> Result<LiftSample<T>, MatchError> {
    Ok(LiftSample {
        x: x.to_vec(),
        fx: f.point(x)?,
        nu: f.normal(x)?,
    })
}

impl<T: Real> Frontal<T> for SurfaceGerm<T> {
    fn arity(&self) -> usize {
        2
    }
    fn dim(&self) -> usize {
        3
    }
    fn domain(&self) -> Vec<Interval<T>> {
        let d = SurfaceGerm::domain(self);
        vec![d.u, d.v]
    }
    fn point(&self, x: &[T]) -> Result<Vec<T>, MatchError> {
        Ok(SurfaceGerm::point(self, x[0], x[1])?.0.to_vec())
    }
    fn normal(&self, x: &[T]) -> Result<Vec<T>, MatchError> {
        Ok(SurfaceGerm::normal(self, x[0], x[1])?.0.to_vec())
    }
}

/// A plane curve whose unit normal is continued through its cusps.
#[derive(Clone)]
pub struct PlaneCurve<T: Real> {
    name: String,
    map: Arc<dyn Evaluable<T>>,
    domain: Interval<T>,
    /// Parameters where the velocity reverses direction.
    cusps: Vec<T>,
}

impl<T: Real> std::fmt::Debug for PlaneCurve<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PlaneCurve")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("cusps", &self.cusps)
            .finish()
    }
}

fn rot<T: Real>(d: [T; 2]) -> [T; 2] {
    [-d[1], d[0]]
}

impl<T: Real> PlaneCurve<T> {
    pub fn new(name: &str, map: Arc<dyn Evaluable<T>>, domain: Interval<T>) -> Result<Self, MatchError> {
        if map.arity() != 1 || map.dim() != 2 {
            return Err(MatchError::Shape {
                arity: map.arity(),
                dim: map.dim(),
            });
        }
        let mut c = PlaneCurve {
            name: name.to_string(),
            map,
            domain,
            cusps: Vec::new(),
        };
        c.cusps = c.find_cusps()?;
        Ok(c)
    }

    /// Parses `t ↦ (x, y)`.
    pub fn parse(name: &str, comps: [&str; 2], domain: Interval<T>) -> Result<Self, MatchError> {
        let m = MapDef::parse(name, &["t"], &comps, &[])?;
        Self::new(name, Arc::new(m), domain)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn cusps(&self) -> &[T] {
        &self.cusps
    }

    fn velocity(&self, t: T) -> Result<[T; 2], MatchError> {
        let j = map_jets(self.map.as_ref(), &[Jet::variable(t, 0, 1, 1)])?;
        Ok([j[0].partial(1, 0), j[1].partial(1, 0)])
    }

    /// First derivative of order ≥ 1 that is not negligible.
    fn leading_derivative(&self, t: T) -> Result<[T; 2], MatchError> {
        let j = map_jets(self.map.as_ref(), &[Jet::variable(t, 0, 1, MAX_ORDER)])?;
        let scale = j.iter().fold(T::one(), |m, c| m.max(c.value().abs()));
        let order = j[0].order().max(j[1].order());
        for k in 1..=order {
            let d = [j[0].coeff(k, 0), j[1].coeff(k, 0)];
            if d[0].hypot(d[1]) > T::lit(1e-10) * scale {
                return Ok(d);
            }
        }
        Err(MatchError::NotAFrontal { at: vec![t.to_f64_lossy()] })
    }

    fn find_cusps(&self) -> Result<Vec<T>, MatchError> {
        let ts = self.domain.linspace(2049);
        let dot = |a: [T; 2], b: [T; 2]| a[0] * b[0] + a[1] * b[1];
        let mut out = Vec::new();
        let mut prev: Option<(T, [T; 2])> = None;
        for &t in &ts {
            let v = self.velocity(t)?;
            if v[0] == T::zero() && v[1] == T::zero() {
                // exactly on a stationary point: decide by the neighbours
                let h = self.domain.len() * T::lit(1e-9);
                let (l, r) = (self.velocity(t - h)?, self.velocity(t + h)?);
                if dot(l, r) < T::zero() && out.last() != Some(&t) {
                    out.push(t);
                }
                continue;
            }
            if let Some((tp, vp)) = prev {
                if dot(vp, v) < T::zero() && !out.last().is_some_and(|&c| c >= tp) {
                    let (mut lo, mut hi) = (tp, t);
                    for _ in 0..200 {
                        let mid = (lo + hi) * T::lit(0.5);
                        if mid <= lo || mid >= hi {
                            break;
                        }
                        let vm = self.velocity(mid)?;
                        if dot(vm, vp) > T::zero() {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    out.push((lo + hi) * T::lit(0.5));
                }
            }
            prev = Some((t, v));
        }
        Ok(out)
    }

    /// `+1` right of the first cusp, flipping across each cusp.
    fn orientation(&self, t: T) -> T {
        let Some(&first) = self.cusps.first() else {
            return T::one();
        };
        if t < first {
            return -T::one();
        }
        let passed = self.cusps.iter().filter(|&&c| c < t).count();
        if passed % 2 == 1 {
            T::one()
        } else {
            -T::one()
        }
    }
}

impl<T: Real> Frontal<T> for PlaneCurve<T> {
    fn arity(&self) -> usize {
        1
    }
    fn dim(&self) -> usize {
        2
    }
    fn domain(&self) -> Vec<Interval<T>> {
        vec![self.domain]
    }
    fn point(&self, x: &[T]) -> Result<Vec<T>, MatchError> {
        Ok(self.map.eval(x)?)
    }
    fn normal(&self, x: &[T]) -> Result<Vec<T>, MatchError> {
        let t = x[0];
        let v = self.velocity(t)?;
        let at_cusp = self.cusps.iter().any(|&c| c == t);
        let (d, sign) = if at_cusp || v[0].hypot(v[1]) < T::lit(1e-150) {
            // limit from the right
            let s = if at_cusp {
                self.orientation(t + self.domain.len() * T::lit(1e-9))
            } else {
                self.orientation(t)
            };
            (self.leading_derivative(t)?, s)
        } else {
            (v, self.orientation(t))
        };
        let n = rot(d);
        let len = n[0].hypot(n[1]);
        Ok(vec![sign * n[0] / len, sign * n[1] / len])
    }
}

/// `T ∘ f` with lift `(T f, Q ν)`.
pub struct Moved<'a, T: Real> {
    pub inner: &'a dyn Frontal<T>,
    pub iso: Isometry<T>,
}

impl<T: Real> Frontal<T> for Moved<'_, T> {
    fn arity(&self) -> usize {
        self.inner.arity()
    }
    fn dim(&self) -> usize {
        3
    }
    fn domain(&self) -> Vec<Interval<T>> {
        self.inner.domain()
    }
    fn point(&self, x: &[T]) -> Result<Vec<T>, MatchError> {
        let p = self.inner.point(x)?;
        Ok(self.iso.apply(&V3::new(p[0], p[1], p[2])).0.to_vec())
    }
    fn normal(&self, x: &[T]) -> Result<Vec<T>, MatchError> {
        let n = self.inner.normal(x)?;
        Ok(self.iso.q.apply(&V3::new(n[0], n[1], n[2])).0.to_vec())
    }
}

/// Restriction of a frontal to a sub-box of its domain.
pub struct Restricted<'a, T: Real> {
    pub inner: &'a dyn Frontal<T>,
    pub domain: Vec<Interval<T>>,
}

impl<T: Real> Frontal<T> for Restricted<'_, T> {
    fn arity(&self) -> usize {
        self.inner.arity()
    }
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn domain(&self) -> Vec<Interval<T>> {
        self.domain.clone()
    }
    fn point(&self, x: &[T]) -> Result<Vec<T>, MatchError> {
        self.inner.point(x)
    }
    fn normal(&self, x: &[T]) -> Result<Vec<T>, MatchError> {
        self.inner.normal(x)
    }
}

/// The box scaled by `factor` about its centre.
pub fn shrink<T: Real>(dom: &[Interval<T>], factor: T) -> Vec<Interval<T>> {
    dom.iter().map(|d| d.scaled(factor)).collect()
}

/// Tensor grid over a box with `n` points per axis.
pub fn box_grid<T: Real>(dom: &[Interval<T>], n: usize) -> Vec<Vec<T>> {
    match dom.len() {
        1 => dom[0].linspace(n).into_iter().map(|t| vec![t]).collect(),
        _ => {
            let (us, vs) = (dom[0].linspace(n), dom[1].linspace(n));
            us.iter().flat_map(|&u| vs.iter().map(move |&v| vec![u, v])).collect()
        }
    }
}
