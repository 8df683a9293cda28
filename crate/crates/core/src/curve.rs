//! Space curves: Frenet apparatus, arc-length reparametrization, planarity and
//! reversal symmetries.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exprlang::MapDef;
use crate::geom::{Isometry, Mat3, Plane};
use crate::numkit::{
    integrate, invert_monotone, map_jets, CubicSpline, Evaluable, Interval, Jet, NumError,
};
use crate::scalar::{det3, Real, Scalar, V3};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurveError {
    #[error("curve speed vanishes at u = {at}")]
    VanishingSpeed { at: f64 },
    #[error("curvature vanishes at u = {at}; Frenet frame undefined")]
    VanishingCurvature { at: f64 },
    #[error("parameter {at} outside the curve domain")]
    OutOfDomain { at: f64 },
    #[error("curve map must take one variable into 3-space, got {arity} -> {dim}")]
    Shape { arity: usize, dim: usize },
    #[error(transparent)]
    Num(#[from] NumError),
}

/// Cumulative arc length of the underlying map, inverted on demand.
struct ArcTable<T: Real> {
    map: Arc<dyn Evaluable<T>>,
    knots: Vec<T>,
    cum: Vec<T>,
}

fn speed_at<T: Real>(map: &dyn Evaluable<T>, t: T) -> Result<T, NumError> {
    let j = map_jets(map, &[Jet::variable(t, 0, 1, 1)])?;
    Ok(j.iter().fold(T::zero(), |s, c| s + c.partial(1, 0) * c.partial(1, 0)).sqrt())
}

impl<T: Real> ArcTable<T> {
    fn build(map: Arc<dyn Evaluable<T>>, dom: Interval<T>, tol: T) -> Result<Self, NumError> {
        let knots = dom.linspace(257);
        let mut cum = vec![T::zero()];
        for w in knots.windows(2) {
            let seg = integrate(
                |t| speed_at(map.as_ref(), t).unwrap_or(T::nan()),
                Interval::new(w[0], w[1]),
                tol / T::lit(256.0),
            )?;
            cum.push(*cum.last().unwrap() + seg);
        }
        Ok(ArcTable { map, knots, cum })
    }

    fn length(&self) -> T {
        *self.cum.last().unwrap()
    }

    fn phi(&self, s: T) -> Result<T, NumError> {
        let s = s.max(T::zero()).min(self.length());
        let k = match self.cum.binary_search_by(|c| c.partial_cmp(&s).unwrap()) {
            Ok(k) => return Ok(self.knots[k]),
            Err(k) => k.clamp(1, self.knots.len() - 1) - 1,
        };
        let (t0, t1) = (self.knots[k], self.knots[k + 1]);
        let base = self.cum[k];
        let tol = T::epsilon() * T::lit(8.0) * (T::one() + self.length());
        invert_monotone(
            |t| {
                base + integrate(
                    |x| speed_at(self.map.as_ref(), x).unwrap_or(T::nan()),
                    Interval::new(t0, t.max(t0)),
                    tol,
                )
                .unwrap_or(T::nan())
            },
            s,
            Interval::new(t0, t1),
            tol,
        )
    }

    /// Taylor series of the inverse arc-length map in `h = s - s0`.
    fn phi_series(&self, s0: T, order: usize) -> Result<Jet<T>, NumError> {
        let t0 = self.phi(s0)?;
        let h = Jet::variable(T::zero(), 0, 1, order);
        let mut phi = h / speed_at(self.map.as_ref(), t0)? + t0;
        for _ in 0..=order {
            let c = map_jets(self.map.as_ref(), &[phi])?;
            let speed = c
                .iter()
                .map(|x| x.derivative(0))
                .fold(Jet::constant(T::zero()), |s, d| s + d * d)
                .sqrt();
            phi = ((phi.derivative(0) / speed).integral() + t0).truncate(order);
        }
        Ok(phi)
    }
}

/// A curve `s ↦ map(φ(a s + b))` where `φ` is the identity or an inverse
/// arc-length table.
#[derive(Clone)]
pub struct SpaceCurve<T: Real> {
    name: String,
    map: Arc<dyn Evaluable<T>>,
    domain: Interval<T>,
    scale: T,
    shift: T,
    table: Option<Arc<ArcTable<T>>>,
    arclength: bool,
}

impl<T: Real> fmt::Debug for SpaceCurve<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpaceCurve")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("arclength", &self.arclength)
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrenetSample<T> {
    pub u: T,
    pub e: V3<T>,
    pub n: V3<T>,
    pub b: V3<T>,
    pub kappa: T,
    pub tau: T,
}

/// Frenet data as Taylor series in `h = u - u0`.
#[derive(Debug, Clone, Copy)]
pub struct FrenetSeries<T: Real> {
    pub u0: T,
    pub c: V3<Jet<T>>,
    pub e: V3<Jet<T>>,
    pub n: V3<Jet<T>>,
    pub b: V3<Jet<T>>,
    pub kappa: Jet<T>,
    pub tau: Jet<T>,
}

impl<T: Real> FrenetSeries<T> {
    /// Substitutes the parameter jet `u` (any number of variables).
    pub fn compose(&self, u: &Jet<T>) -> FrenetSeries<T> {
        let s = |j: &Jet<T>| j.compose_series_at(u, self.u0);
        let v = |x: &V3<Jet<T>>| x.map(|j| s(&j));
        FrenetSeries {
            u0: self.u0,
            c: v(&self.c),
            e: v(&self.e),
            n: v(&self.n),
            b: v(&self.b),
            kappa: s(&self.kappa),
            tau: s(&self.tau),
        }
    }
}

/// Unit-speed curve with tangent `(a cos φ(s), a sin φ(s), b)`, `a² + b² = 1`,
/// starting at the origin at the left end of its domain.
struct SlopeCurve<T: Real> {
    phi: MapDef<T>,
    a: T,
    b: T,
    knots: Vec<T>,
    cum: Vec<V3<T>>,
}

impl<T: Real> SlopeCurve<T> {
    fn tangent(&self, s: T) -> Result<V3<T>, NumError> {
        let p = self.phi.eval_component(0, &[s]).map_err(|e| NumError::Domain(e.to_string()))?;
        Ok(V3::new(self.a * p.cos(), self.a * p.sin(), self.b))
    }

    fn segment(&self, lo: T, hi: T) -> Result<V3<T>, NumError> {
        let tol = T::epsilon() * T::lit(64.0);
        let mut out = [T::zero(); 3];
        for (k, o) in out.iter_mut().enumerate() {
            *o = integrate(|x| self.tangent(x).map(|t| t.0[k]).unwrap_or(T::nan()), Interval::new(lo, hi), tol)?;
        }
        Ok(V3(out))
    }

    fn build(phi: MapDef<T>, a: T, domain: Interval<T>) -> Result<Self, NumError> {
        let b = (T::one() - a * a).max(T::zero()).sqrt();
        let mut c = SlopeCurve { phi, a, b, knots: domain.linspace(129), cum: vec![V3::zero()] };
        for k in 1..c.knots.len() {
            let d = c.segment(c.knots[k - 1], c.knots[k])?;
            let last = c.cum[k - 1];
            c.cum.push(last + d);
        }
        Ok(c)
    }

    fn at(&self, s: T) -> Result<V3<T>, NumError> {
        let step = self.knots[1] - self.knots[0];
        let k = ((s - self.knots[0]) / step).floor().to_f64_lossy();
        let k = (k.max(0.0) as usize).min(self.knots.len() - 1);
        Ok(self.cum[k] + self.segment(self.knots[k], s)?)
    }
}

impl<T: Real> Evaluable<T> for SlopeCurve<T> {
    fn arity(&self) -> usize {
        1
    }
    fn dim(&self) -> usize {
        3
    }
    fn eval(&self, x: &[T]) -> Result<Vec<T>, NumError> {
        Ok(self.at(x[0])?.0.to_vec())
    }
    fn eval_jet(&self, x: &[Jet<T>]) -> Option<Result<Vec<Jet<T>>, NumError>> {
        let s0 = x[0].value();
        let p0 = match self.at(s0) {
            Ok(p) => p,
            Err(e) => return Some(Err(e)),
        };
        if x[0].nvars() == 0 {
            return Some(Ok(p0.0.iter().map(|&v| Jet::constant(v)).collect()));
        }
        let order = x[0].order().max(1) - 1;
        let h = Jet::variable(s0, 0, 1, order);
        let phi = match self.phi.eval_component(0, &[h]) {
            Ok(p) => p,
            Err(e) => return Some(Err(NumError::Domain(e.to_string()))),
        };
        let t = [phi.cos() * self.a, phi.sin() * self.a, Jet::constant(self.b)];
        Some(Ok((0..3)
            .map(|k| {
                let mut t = t[k];
                if t.nvars() == 0 {
                    t = Jet::variable(T::zero(), 0, 1, order) * T::zero() + t.value();
                }
                (t.integral() + p0.0[k]).compose_series_at(&x[0], s0)
            })
            .collect()))
    }
}

fn deriv3<T: Real>(x: &V3<Jet<T>>) -> V3<Jet<T>> {
    x.map(|j| j.derivative(0))
}

impl<T: Real> SpaceCurve<T> {
    pub fn new(name: &str, map: Arc<dyn Evaluable<T>>, domain: Interval<T>) -> Result<Self, CurveError> {
        if map.arity() != 1 || map.dim() != 3 {
            return Err(CurveError::Shape {
                arity: map.arity(),
                dim: map.dim(),
            });
        }
        Ok(SpaceCurve {
            name: name.to_string(),
            map,
            domain,
            scale: T::one(),
            shift: T::zero(),
            table: None,
            arclength: false,
        })
    }

    pub fn from_mapdef(map: MapDef<T>, domain: Interval<T>) -> Result<Self, CurveError> {
        let name = map.name().to_string();
        Self::new(&name, Arc::new(map), domain)
    }

    fn builtin(name: &str, comps: [&str; 3], params: &[(&str, T)], domain: Interval<T>) -> Self {
        let m = MapDef::parse(name, &["t"], &comps, params).expect("builtin curve parses");
        Self::from_mapdef(m, domain).expect("builtin curve shape")
    }

    /// `(r cos t, r sin t, 0)`.
    pub fn circle(r: T, domain: Interval<T>) -> Self {
        Self::builtin("circle", ["r*cos(t)", "r*sin(t)", "0"], &[("r", r)], domain)
    }

    /// `(a cos t, a sin t, b t)`.
    pub fn helix(a: T, b: T, domain: Interval<T>) -> Self {
        Self::builtin("helix", ["a*cos(t)", "a*sin(t)", "b*t"], &[("a", a), ("b", b)], domain)
    }

    /// The x-axis, `(t, 0, 0)`.
    pub fn segment(domain: Interval<T>) -> Self {
        Self::builtin("segment", ["t", "0", "0"], &[], domain)
    }

    /// Circle of radius `r` parametrized by arc length.
    pub fn circle_arclength(r: T, domain: Interval<T>) -> Self {
        let mut c = Self::builtin("circle", ["r*cos(t/r)", "r*sin(t/r)", "0"], &[("r", r)], domain);
        c.arclength = true;
        c
    }

    /// Helix `(a cos, a sin, b ·)` parametrized by arc length.
    pub fn helix_arclength(a: T, b: T, domain: Interval<T>) -> Self {
        let k = (a * a + b * b).sqrt();
        let mut c = Self::builtin(
            "helix",
            ["a*cos(t/k)", "a*sin(t/k)", "b*t/k"],
            &[("a", a), ("b", b), ("k", k)],
            domain,
        );
        c.arclength = true;
        c
    }

    /// Arc-length curve of constant slope with turning angle `phi(s)`:
    /// tangent `(a cos φ, a sin φ, √(1 - a²))`, so `κ = a φ'` and
    /// `τ = √(1 - a²) φ'`. Starts at the origin at `domain.lo`.
    pub fn constant_slope(name: &str, phi: &str, a: T, domain: Interval<T>) -> Result<Self, CurveError> {
        let phi = MapDef::parse(name, &["s"], &[phi], &[]).map_err(|e| NumError::Domain(e.to_string()))?;
        let mut c = Self::new(name, Arc::new(SlopeCurve::build(phi, a, domain)?), domain)?;
        c.arclength = true;
        Ok(c)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> Interval<T> {
        self.domain
    }

    pub fn is_arclength(&self) -> bool {
        self.arclength
    }

    /// Marks the curve as unit speed after checking `|c'| = 1` to `tol` on a
    /// probe grid.
    pub fn assume_arclength(mut self, tol: T) -> Result<Self, CurveError> {
        for s in self.domain.linspace(33) {
            let d = self.derivatives(s, 1)?;
            let sp = d[1].norm();
            if (sp - T::one()).abs() > tol {
                return Err(CurveError::VanishingSpeed { at: s.to_f64_lossy() });
            }
        }
        self.arclength = true;
        Ok(self)
    }

    /// The same point set traversed backwards: `s ↦ c(-s)` on `[-hi, -lo]`.
    pub fn reversed(&self) -> Self {
        let mut r = self.clone();
        r.scale = -self.scale;
        r.domain = Interval::new(-self.domain.hi, -self.domain.lo);
        r.name = format!("{}~", self.name);
        r
    }

    /// Parameter of the underlying map at curve parameter `s`.
    pub fn parameter(&self, s: T) -> Result<T, CurveError> {
        let t = s * self.scale + self.shift;
        Ok(match &self.table {
            None => t,
            Some(tab) => tab.phi(t)?,
        })
    }

    /// [`Self::parameter`] as a jet.
    pub fn parameter_jet(&self, s: &Jet<T>) -> Result<Jet<T>, CurveError> {
        Ok(self.param_jet(s)?)
    }

    /// The same curve with parameter `s + c`.
    pub fn translated(&self, c: T) -> Self {
        let mut r = self.clone();
        r.domain = Interval::new(self.domain.lo + c, self.domain.hi + c);
        r.shift = self.shift - self.scale * c;
        r
    }

    fn param_jet(&self, s: &Jet<T>) -> Result<Jet<T>, NumError> {
        let t = *s * self.scale + self.shift;
        match &self.table {
            None => Ok(t),
            Some(tab) => {
                let t0 = t.value();
                let order = if t.nvars() == 0 { 0 } else { t.order() };
                Ok(tab.phi_series(t0, order)?.compose_series_at(&t, t0))
            }
        }
    }

    pub fn point(&self, s: T) -> Result<V3<T>, CurveError> {
        let t = self.parameter(s)?;
        let v = self.map.eval(&[t])?;
        Ok(V3([v[0], v[1], v[2]]))
    }

    /// Position as jets in whatever variables `s` carries.
    pub fn point_jet(&self, s: &Jet<T>) -> Result<V3<Jet<T>>, CurveError> {
        let t = self.param_jet(s)?;
        let v = map_jets(self.map.as_ref(), &[t])?;
        Ok(V3([v[0], v[1], v[2]]))
    }

    /// `c, c', ..., c^(k)` at `s`.
    pub fn derivatives(&self, s: T, k: usize) -> Result<Vec<V3<T>>, CurveError> {
        let p = self.point_jet(&Jet::variable(s, 0, 1, k))?;
        Ok((0..=k).map(|i| p.map(|j| j.partial(i, 0))).collect())
    }

    pub fn frenet(&self, s: T) -> Result<FrenetSample<T>, CurveError> {
        let d = self.derivatives(s, 3)?;
        let (c1, c2, c3) = (d[1], d[2], d[3]);
        let speed = c1.norm();
        let at = s.to_f64_lossy();
        if !(speed > T::epsilon().sqrt() * T::lit(1e-4)) {
            return Err(CurveError::VanishingSpeed { at });
        }
        let cr = c1.cross(&c2);
        let crn = cr.norm();
        if !(crn > T::epsilon() * T::lit(1e4) * speed * speed * speed) {
            return Err(CurveError::VanishingCurvature { at });
        }
        let e = c1.scale(T::one() / speed);
        let b = cr.scale(T::one() / crn);
        Ok(FrenetSample {
            u: s,
            e,
            n: b.cross(&e),
            b,
            kappa: crn / (speed * speed * speed),
            tau: det3(&c1, &c2, &c3) / (crn * crn),
        })
    }

    /// Frenet apparatus as Taylor series of the given order about `s0`.
    /// `order` is capped at `MAX_ORDER - 3`.
    pub fn frenet_series(&self, s0: T, order: usize) -> Result<FrenetSeries<T>, CurveError> {
        let order = order.min(crate::numkit::MAX_ORDER - 3);
        let f = self.frenet(s0)?;
        if order == 0 {
            let k = |x: V3<T>| x.map(Jet::constant);
            return Ok(FrenetSeries {
                u0: s0,
                c: k(self.point(s0)?),
                e: k(f.e),
                n: k(f.n),
                b: k(f.b),
                kappa: Jet::constant(f.kappa),
                tau: Jet::constant(f.tau),
            });
        }
        let c = self.point_jet(&Jet::variable(s0, 0, 1, order + 3))?;
        let c1 = deriv3(&c);
        let c2 = deriv3(&c1);
        let c3 = deriv3(&c2);
        let speed = c1.norm();
        let cr = c1.cross(&c2);
        let crn = cr.norm();
        let e = c1.scale(speed.recip());
        let b = cr.scale(crn.recip());
        let n = b.cross(&e);
        let tr = |j: Jet<T>| j.truncate(order);
        let trv = |v: V3<Jet<T>>| v.map(tr);
        let series = FrenetSeries {
            u0: s0,
            c: trv(c),
            e: trv(e),
            n: trv(n),
            b: trv(b),
            kappa: tr(crn / (speed * speed * speed)),
            tau: tr(det3(&c1, &c2, &c3) / (crn * crn)),
        };
        debug_assert!((series.kappa.value() - f.kappa).abs() <= T::lit(1e-6) * (T::one() + f.kappa));
        Ok(series)
    }

    /// Unit-speed reparametrization on `[0, length]`.
    pub fn arclength_param(&self, tol: T) -> Result<Self, CurveError> {
        let probes = self.domain.linspace(65);
        let mut speeds = Vec::with_capacity(probes.len());
        for &s in &probes {
            let sp = self.derivatives(s, 1)?[1].norm();
            if !(sp > T::epsilon().sqrt()) {
                return Err(CurveError::VanishingSpeed { at: s.to_f64_lossy() });
            }
            speeds.push(sp);
        }
        let (lo, hi) = speeds.iter().fold((T::infinity(), T::zero()), |(a, b), &x| (a.min(x), b.max(x)));
        let mut out = self.clone();
        out.arclength = true;
        if hi - lo <= T::lit(1e-12) * hi {
            // constant speed: exact affine change of parameter
            let speed = speeds.iter().fold(T::zero(), |s, x| s + *x) / T::lit(speeds.len() as f64);
            let len = self.domain.len() * speed;
            out.domain = Interval::new(T::zero(), len);
            out.scale = self.scale / speed;
            out.shift = self.scale * self.domain.lo + self.shift;
            return Ok(out);
        }
        if self.table.is_some() || self.scale != T::one() || self.shift != T::zero() {
            // normalize away earlier reparametrizations by sampling through them
            let base = self.base_interval();
            let tab = ArcTable::build(self.map.clone(), base, tol)?;
            return self.wrap_table(tab);
        }
        let tab = ArcTable::build(self.map.clone(), self.domain, tol)?;
        self.wrap_table(tab)
    }

    fn base_interval(&self) -> Interval<T> {
        let a = self.domain.lo * self.scale + self.shift;
        let b = self.domain.hi * self.scale + self.shift;
        let (a, b) = (a.min(b), a.max(b));
        match &self.table {
            None => Interval::new(a, b),
            Some(t) => Interval::new(t.phi(a).unwrap_or(a), t.phi(b).unwrap_or(b)),
        }
    }

    fn wrap_table(&self, tab: ArcTable<T>) -> Result<Self, CurveError> {
        let mut out = self.clone();
        let len = tab.length();
        out.domain = Interval::new(T::zero(), len);
        out.scale = T::one();
        out.shift = T::zero();
        out.table = Some(Arc::new(tab));
        out.arclength = true;
        if self.scale < T::zero() {
            // keep the original orientation
            out.scale = -T::one();
            out.shift = len;
        }
        Ok(out)
    }

    /// Length of the curve.
    pub fn length(&self, tol: T) -> Result<T, CurveError> {
        if self.arclength {
            return Ok(self.domain.len());
        }
        Ok(integrate(
            |s| self.derivatives(s, 1).map(|d| d[1].norm()).unwrap_or(T::nan()),
            self.domain,
            tol,
        )?)
    }

    /// The osculating plane when `max |τ| < tol` on a probe grid.
    pub fn curve_plane(&self, tol: T) -> Option<Plane<T>> {
        for s in self.domain.linspace(65) {
            match self.frenet(s) {
                Ok(f) if f.tau.abs() < tol => {}
                _ => return None,
            }
        }
        let mid = self.domain.mid();
        let f = self.frenet(mid).ok()?;
        Plane::new(self.point(mid).ok()?, f.b).ok()
    }

    /// Searches for an isometry `S` with `S(c(s)) = c(shift - s)`.
    pub fn curve_symmetry(&self, tol: T) -> Option<CurveSymmetry<T>> {
        let c = if self.arclength {
            self.clone()
        } else {
            self.arclength_param(T::lit(1e-12)).ok()?
        };
        let profile = Profile::sample(c.domain, 1025, |s| c.frenet(s).map(|f| vec![f.kappa, f.tau])).ok()?;
        let profile_tol = (tol * T::lit(100.0)).max(T::lit(1e-6));
        for det in [T::one(), -T::one()] {
            let Some(m) = match_profiles(&profile, &profile, -T::one(), &[T::one(), det], profile_tol) else {
                continue;
            };
            let mid = m.shift * T::lit(0.5);
            let Ok(f) = c.frenet(mid) else { continue };
            let q = Mat3::outer(&f.n, &f.n)
                .sub(&Mat3::outer(&f.e, &f.e))
                .sub(&Mat3::outer(&f.b, &f.b).scale(det));
            let Ok(p) = c.point(mid) else { continue };
            let iso = Isometry { q, b: p - q.apply(&p) };
            let ov = m.overlap_interval;
            let mut residual = T::zero();
            let mut ok = true;
            for s in ov.linspace(65) {
                match (c.point(s), c.point(m.shift - s)) {
                    (Ok(a), Ok(b)) => residual = residual.max((iso.apply(&a) - b).norm()),
                    _ => ok = false,
                }
            }
            if ok && residual <= tol.max(T::lit(1e-9)) {
                return Some(CurveSymmetry {
                    iso,
                    det_sign: if det > T::zero() { 1 } else { -1 },
                    shift: m.shift,
                    residual,
                });
            }
        }
        None
    }
}

/// An orientation-reversing self-congruence of a curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CurveSymmetry<T: Real> {
    pub iso: Isometry<T>,
    /// Determinant of the orthogonal part.
    pub det_sign: i8,
    /// Matched parameters satisfy `s ↦ shift - s`.
    pub shift: T,
    pub residual: T,
}

/// Vector-valued function of one variable, sampled and splined.
#[derive(Debug, Clone)]
pub struct Profile<T> {
    pub domain: Interval<T>,
    channels: Vec<CubicSpline<T>>,
}

impl<T: Real> Profile<T> {
    pub fn sample<E>(domain: Interval<T>, n: usize, f: impl Fn(T) -> Result<Vec<T>, E>) -> Result<Self, E> {
        let xs = domain.linspace(n);
        let mut cols: Vec<Vec<T>> = Vec::new();
        for &x in &xs {
            let v = f(x)?;
            if cols.is_empty() {
                cols = vec![Vec::with_capacity(n); v.len()];
            }
            for (c, y) in cols.iter_mut().zip(v) {
                c.push(y);
            }
        }
        Ok(Profile {
            domain,
            channels: cols.into_iter().map(|ys| CubicSpline::new(xs.clone(), ys)).collect(),
        })
    }

    pub fn eval(&self, s: T) -> Vec<T> {
        self.channels.iter().map(|c| c.eval(s)).collect()
    }

    pub fn channels(&self) -> usize {
        self.channels.len()
    }

    fn scale(&self) -> T {
        self.channels
            .iter()
            .flat_map(|c| c.values().iter())
            .fold(T::one(), |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileMatch<T> {
    pub sigma: T,
    pub shift: T,
    pub mismatch: T,
    pub overlap_interval: Interval<T>,
}

fn overlap<T: Real>(a: &Interval<T>, b: &Interval<T>, sigma: T, c: T) -> Option<Interval<T>> {
    let (lo, hi) = if sigma > T::zero() {
        (b.lo - c, b.hi - c)
    } else {
        (c - b.hi, c - b.lo)
    };
    let (lo, hi) = (lo.max(a.lo), hi.min(a.hi));
    (lo <= hi).then(|| Interval::new(lo, hi))
}

fn mismatch<T: Real>(a: &Profile<T>, b: &Profile<T>, sigma: T, signs: &[T], c: T, min_len: T) -> Option<(T, Interval<T>)> {
    let ov = overlap(&a.domain, &b.domain, sigma, c)?;
    if ov.len() < min_len {
        return None;
    }
    let scale = a.scale().max(b.scale());
    let mut worst = T::zero();
    for s in ov.linspace(129) {
        let pa = a.eval(s);
        let pb = b.eval(sigma * s + c);
        let d = pa
            .iter()
            .zip(&pb)
            .zip(signs)
            .fold(T::zero(), |acc, ((x, y), k)| acc + (*x - *k * *y).abs());
        worst = worst.max(d / scale);
    }
    Some((worst, ov))
}

/// Finds `c` with `a_k(s) = signs_k · b_k(σ s + c)` on an overlap covering at
/// least half of the shorter domain. Among accepted shifts the one with the
/// largest overlap wins.
pub fn match_profiles<T: Real>(a: &Profile<T>, b: &Profile<T>, sigma: T, signs: &[T], tol: T) -> Option<ProfileMatch<T>> {
    let min_len = a.domain.len().min(b.domain.len()) * T::lit(0.5);
    let range = if sigma > T::zero() {
        Interval::new(b.domain.lo - a.domain.hi + min_len, b.domain.hi - a.domain.lo - min_len)
    } else {
        Interval::new(a.domain.lo + b.domain.lo + min_len, a.domain.hi + b.domain.hi - min_len)
    };
    let grid = range.linspace(513);
    let step = range.len() / T::lit(512.0);
    let scored: Vec<(T, T, Interval<T>)> = grid
        .iter()
        .filter_map(|&c| mismatch(a, b, sigma, signs, c, min_len).map(|(m, ov)| (c, m, ov)))
        .collect();
    let accepted = scored
        .iter()
        .filter(|(_, m, _)| *m <= tol)
        .max_by(|x, y| x.2.len().partial_cmp(&y.2.len()).unwrap());
    if let Some(&(c, m, ov)) = accepted {
        return Some(ProfileMatch {
            sigma,
            shift: c,
            mismatch: m,
            overlap_interval: ov,
        });
    }
    // golden-section refinement around the best grid shift
    let &(c0, _, _) = scored.iter().min_by(|x, y| x.1.partial_cmp(&y.1).unwrap())?;
    let f = |c: T| mismatch(a, b, sigma, signs, c, min_len).map_or(T::infinity(), |r| r.0);
    let g = T::lit(0.618_033_988_749_894_8);
    let (mut lo, mut hi) = (c0 - step, c0 + step);
    for _ in 0..80 {
        let x1 = hi - g * (hi - lo);
        let x2 = lo + g * (hi - lo);
        if f(x1) < f(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    let c = (lo + hi) * T::lit(0.5);
    let (m, ov) = mismatch(a, b, sigma, signs, c, min_len)?;
    (m <= tol).then_some(ProfileMatch {
        sigma,
        shift: c,
        mismatch: m,
        overlap_interval: ov,
    })
}
