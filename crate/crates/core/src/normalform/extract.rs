use std::sync::Arc;

use rayon::prelude::*;

use super::{EdgeNormalForm, NormalFormError, ScalarFn, STATIONS};
use crate::curve::SpaceCurve;
use crate::germ::SurfaceGerm;
use crate::numkit::{integrate, map_jets, CubicSpline, Evaluable, Interval, Jet, NumError};
use crate::scalar::{Real, Scalar, V3};

/// Truncation order of the section series.
pub const CUSP_ORDER: usize = 8;

/// Half-arc-length `w(t) = sign(t − c)·sqrt|∫_c^t |σ'||` of a plane curve
/// with a generalized cusp at `c`.
pub fn half_arclength<T: Real>(sigma: &dyn Evaluable<T>, c: T, t: T, tol: T) -> Result<T, NormalFormError> {
    let j = map_jets(sigma, &[Jet::variable(c, 0, 1, 2)])?;
    let d2 = j.iter().fold(T::zero(), |s, x| s + x.partial(2, 0) * x.partial(2, 0)).sqrt();
    if !(d2 > T::lit(1e-10)) {
        return Err(NormalFormError::DegenerateCusp { at: c.to_f64_lossy() });
    }
    if t == c {
        return Ok(T::zero());
    }
    let speed = |x: T| {
        map_jets(sigma, &[Jet::variable(x, 0, 1, 1)])
            .map(|j| j.iter().fold(T::zero(), |s, y| s + y.partial(1, 0) * y.partial(1, 0)).sqrt())
            .unwrap_or(T::nan())
    };
    let (lo, hi) = if t > c { (c, t) } else { (t, c) };
    let len = integrate(speed, Interval::new(lo, hi), tol)?;
    let w = len.sqrt();
    Ok(if t > c { w } else { -w })
}

/// Section of the image by the normal plane at a station, as a Taylor
/// series in the half-arc-length parameter `w`.
#[derive(Debug, Clone)]
pub struct SectionalCusp<T> {
    /// Arc-length station on the crease.
    pub s: T,
    /// Germ parameter `u` of the station.
    pub u: T,
    pub origin: V3<T>,
    /// Orthonormal axes of the normal plane: `(n, b)` when the crease has
    /// curvature, else the opening direction and its rotation by 90°.
    pub axes: [V3<T>; 2],
    pub frenet_axes: bool,
    /// Coordinates along `axes` as series in `w`.
    pub coords: [Vec<T>; 2],
}

impl<T: Real> SectionalCusp<T> {
    /// Plane coordinates at `w`.
    pub fn eval(&self, w: T) -> [T; 2] {
        let p = |c: &Vec<T>| c.iter().rev().fold(T::zero(), |acc, k| acc * w + *k);
        [p(&self.coords[0]), p(&self.coords[1])]
    }

    /// Point in space at `w`.
    pub fn point(&self, w: T) -> V3<T> {
        let [x, y] = self.eval(w);
        self.origin + self.axes[0].scale(x) + self.axes[1].scale(y)
    }

    /// `σ''(0)` in plane coordinates.
    pub fn second_derivative(&self) -> [T; 2] {
        let two = T::lit(2.0);
        [self.coords[0][2] * two, self.coords[1][2] * two]
    }

    /// `σ'(0)` in plane coordinates.
    pub fn first_derivative(&self) -> [T; 2] {
        [self.coords[0][1], self.coords[1][1]]
    }
}

/// `t ↦ f(t, 0)` with exact jets.
struct CreaseSlice<T: Real> {
    germ: SurfaceGerm<T>,
}

impl<T: Real> Evaluable<T> for CreaseSlice<T> {
    fn arity(&self) -> usize {
        1
    }
    fn dim(&self) -> usize {
        3
    }
    fn eval(&self, x: &[T]) -> Result<Vec<T>, NumError> {
        let p = self.germ.point(x[0], T::zero()).map_err(|e| NumError::Domain(e.to_string()))?;
        Ok(p.0.to_vec())
    }
    fn eval_jet(&self, x: &[Jet<T>]) -> Option<Result<Vec<Jet<T>>, NumError>> {
        Some(
            map_jets(self.germ.map().as_ref(), &[x[0], Jet::constant(T::zero())]),
        )
    }
}

/// Arc-length parametrized image of `v = 0`, with stations starting at the
/// left end of the germ's `u` range.
fn crease_of<T: Real>(germ: &SurfaceGerm<T>, tol: T) -> Result<SpaceCurve<T>, NormalFormError> {
    let dom = germ.domain().u;
    for u in dom.linspace(17) {
        let (fu, fv) = germ.tangents(u, T::zero())?;
        if fv.norm() > T::lit(1e-8) * (T::one() + fu.norm()) {
            return Err(NormalFormError::NotEdgeCoordinates { at: u.to_f64_lossy() });
        }
    }
    let slice = CreaseSlice { germ: germ.clone() };
    let raw = SpaceCurve::new(&format!("{}|v=0", germ.name()), Arc::new(slice), dom)?;
    Ok(raw.arclength_param(tol)?.translated(dom.lo))
}

fn dot3<T: Real>(a: &V3<Jet<T>>, b: &V3<T>) -> Jet<T> {
    a.0[0] * b.0[0] + a.0[1] * b.0[1] + a.0[2] * b.0[2]
}

/// Series of `σ(v) = f(A(v), v) − f(u0, 0)` where `A` solves
/// `(f(A(v), v) − f(u0, 0))·e = 0`.
fn section_series<T: Real>(germ: &SurfaceGerm<T>, u0: T, e: V3<T>) -> Result<V3<Jet<T>>, NormalFormError> {
    let k = CUSP_ORDER;
    let v = Jet::variable(T::zero(), 0, 1, k);
    let c0 = germ.point(u0, T::zero())?;
    let (fu, _) = germ.tangents(u0, T::zero())?;
    let slope = fu.dot(&e);
    if !(slope.abs() > T::lit(1e-12)) {
        return Err(NormalFormError::NotEdgeCoordinates { at: u0.to_f64_lossy() });
    }
    let mut a = v * T::zero() + u0;
    for _ in 0..=k {
        let f = germ.point_jet(a, v)?;
        let g = dot3(&(f - c0.map(Jet::constant)), &e);
        a = a - g / slope;
    }
    let f = germ.point_jet(a, v)?;
    Ok(f - c0.map(Jet::constant))
}

/// Reparametrizes plane series `(x(v), y(v))` with `x'(0) = y'(0) = 0` by
/// half-arc-length.
fn to_half_arclength<T: Real>(x: Jet<T>, y: Jet<T>, at: T) -> Result<[Jet<T>; 2], NormalFormError> {
    let mx = x.derivative(0).shift_down(1);
    let my = y.derivative(0).shift_down(1);
    let m = (mx * mx + my * my).sqrt();
    if !(m.value() > T::lit(1e-10)) {
        return Err(NormalFormError::DegenerateCusp { at: at.to_f64_lossy() });
    }
    let j = m.shift_up(1).integral().shift_down(2);
    let w = j.sqrt().shift_up(1);
    let vw = w.revert().ok_or(NormalFormError::DegenerateCusp { at: at.to_f64_lossy() })?;
    Ok([
        x.compose_series_at(&vw, T::zero()),
        y.compose_series_at(&vw, T::zero()),
    ])
}

fn series_coeffs<T: Real>(j: &Jet<T>) -> Vec<T> {
    let mut c = j.series();
    c.resize(CUSP_ORDER + 1, T::zero());
    c
}

fn check_station<T: Real>(crease: &SpaceCurve<T>, s: T) -> Result<(), NormalFormError> {
    let d = crease.domain();
    let slack = d.len() * T::lit(1e-12);
    if s < d.lo - slack || s > d.hi + slack {
        return Err(NormalFormError::OutOfRange {
            s: s.to_f64_lossy(),
            lo: d.lo.to_f64_lossy(),
            hi: d.hi.to_f64_lossy(),
        });
    }
    Ok(())
}

fn section_at<T: Real>(germ: &SurfaceGerm<T>, crease: &SpaceCurve<T>, s: T) -> Result<SectionalCusp<T>, NormalFormError> {
    check_station(crease, s)?;
    let u = crease.parameter(s)?;
    let e = crease.derivatives(s, 1)?[1].normalized();
    let sigma = section_series(germ, u, e)?;
    let origin = germ.point(u, T::zero())?;
    let (axes, frenet) = match crease.frenet(s) {
        Ok(f) => ([f.n, f.b], true),
        Err(_) => {
            let d2 = sigma.map(|c| c.coeff(2, 0));
            let x = d2.normalized();
            if !(d2.norm() > T::lit(1e-10)) {
                return Err(NormalFormError::DegenerateCusp { at: s.to_f64_lossy() });
            }
            ([x, e.cross(&x)], false)
        }
    };
    let x = dot3(&sigma, &axes[0]);
    let y = dot3(&sigma, &axes[1]);
    let [xw, yw] = to_half_arclength(x, y, s)?;
    Ok(SectionalCusp {
        s,
        u,
        origin,
        axes,
        frenet_axes: frenet,
        coords: [series_coeffs(&xw), series_coeffs(&yw)],
    })
}

/// Normal-plane section of a generalized cuspidal edge (singular along
/// `v = 0`) at arc-length station `s`.
pub fn sectional_cusp<T: Real>(germ: &SurfaceGerm<T>, s: T, tol: T) -> Result<SectionalCusp<T>, NormalFormError> {
    let crease = crease_of(germ, tol)?;
    section_at(germ, &crease, s)
}

struct StationData<T> {
    theta: T,
    a: Vec<T>,
    b: Vec<T>,
}

fn station_data<T: Real>(sec: &SectionalCusp<T>) -> StationData<T> {
    let [x2, y2] = [sec.coords[0][2], sec.coords[1][2]];
    let theta = (-y2).atan2(x2);
    let (c, s) = (theta.cos(), theta.sin());
    // coordinates along d = (cos, −sin) and d⊥ = (sin, cos)
    let along: Vec<T> = (0..=CUSP_ORDER).map(|k| sec.coords[0][k] * c - sec.coords[1][k] * s).collect();
    let across: Vec<T> = (0..=CUSP_ORDER).map(|k| sec.coords[0][k] * s + sec.coords[1][k] * c).collect();
    StationData {
        theta,
        a: along[2..CUSP_ORDER - 2].to_vec(),
        b: across[3..CUSP_ORDER - 2].to_vec(),
    }
}

/// [`to_normal_form_with`] at the default station count.
pub fn to_normal_form<T: Real>(germ: &SurfaceGerm<T>, halfwidth: T, tol: T) -> Result<EdgeNormalForm<T>, NormalFormError> {
    to_normal_form_with(germ, halfwidth, tol, STATIONS)
}

/// Extracts the normal form of a germ singular along `v = 0`. `θ`, `a`
/// and `b` are splined across `stations` normal-plane sections; `w` is the
/// half-arc-length of each section, so `a(u, 0) = 1`.
pub fn to_normal_form_with<T: Real>(
    germ: &SurfaceGerm<T>,
    halfwidth: T,
    tol: T,
    stations: usize,
) -> Result<EdgeNormalForm<T>, NormalFormError> {
    let crease = crease_of(germ, tol)?;
    let st = crease.domain().linspace(stations);
    let data: Vec<StationData<T>> = st
        .par_iter()
        .map(|&s| {
            let sec = section_at(germ, &crease, s)?;
            if !sec.frenet_axes {
                crease.frenet(s)?;
            }
            Ok(station_data(&sec))
        })
        .collect::<Result<Vec<_>, NormalFormError>>()?;
    let mut theta: Vec<T> = data.iter().map(|d| d.theta).collect();
    let two_pi = T::PI() + T::PI();
    for k in 1..theta.len() {
        while theta[k] - theta[k - 1] > T::PI() {
            theta[k] = theta[k] - two_pi;
        }
        while theta[k] - theta[k - 1] < -T::PI() {
            theta[k] = theta[k] + two_pi;
        }
    }
    let splines = |pick: &dyn Fn(&StationData<T>) -> &Vec<T>| -> Vec<CubicSpline<T>> {
        let n = pick(&data[0]).len();
        (0..n)
            .map(|k| CubicSpline::new(st.clone(), data.iter().map(|d| pick(d)[k]).collect()))
            .collect()
    };
    let a = splines(&|d| &d.a);
    let b = splines(&|d| &d.b);
    EdgeNormalForm::new(
        crease,
        ScalarFn::spline(st.clone(), theta),
        Some(ScalarFn::Series(Arc::new(a))),
        Some(ScalarFn::Series(Arc::new(b))),
        halfwidth,
    )
}
