//! Surface germs `f: U → R³`, their unit normals, singular sets and the
//! frames attached to singular points.

mod catalog;
mod singular;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exprlang::{ExprError, MapDef};
use crate::geom::{GeomError, GermFrame};
use crate::numkit::{map_jets, Evaluable, Interval, Jet, NumError};
use crate::scalar::{Real, V3};

pub use catalog::{by_name, catalog_names, ms_edge, sw_example};
pub use singular::{SingularCurve, SingularSample, SingularType};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GermError {
    #[error("not a frontal at ({u}, {v}): directional normal limits disagree by {disagreement:.3e}")]
    NotAFrontal { u: f64, v: f64, disagreement: f64 },
    #[error("point ({u}, {v}) lies outside the germ domain")]
    OutOfDomain { u: f64, v: f64 },
    #[error("point ({u}, {v}) is a regular point")]
    RegularPoint { u: f64, v: f64 },
    #[error("point ({u}, {v}) has co-rank two")]
    CorankTwo { u: f64, v: f64 },
    #[error("point ({u}, {v}) is a type II singular point")]
    TypeII { u: f64, v: f64 },
    #[error("image of the singular curve is stationary at ({u}, {v})")]
    StationaryImage { u: f64, v: f64 },
    #[error("germ map must take two variables into 3-space, got {arity} -> {dim}")]
    Shape { arity: usize, dim: usize },
    #[error("unknown germ `{0}`")]
    Unknown(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Axis-aligned rectangle in the `(u, v)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect<T> {
    pub u: Interval<T>,
    pub v: Interval<T>,
}

impl<T: Real> Rect<T> {
    pub fn new(u: Interval<T>, v: Interval<T>) -> Self {
        Rect { u, v }
    }

    /// `[-r, r]²`.
    pub fn square(r: T) -> Self {
        Rect::new(Interval::new(-r, r), Interval::new(-r, r))
    }

    pub fn contains(&self, p: [T; 2]) -> bool {
        self.u.contains(p[0]) && self.v.contains(p[1])
    }

    /// The rectangle shrunk about `center` by `factor`, clipped to `self`.
    pub fn shrunk_about(&self, center: [T; 2], factor: T) -> Self {
        let clip = |iv: Interval<T>, c: T| {
            let lo = c - (c - iv.lo) * factor;
            let hi = c + (iv.hi - c) * factor;
            Interval::new(lo, hi)
        };
        Rect::new(clip(self.u, center[0]), clip(self.v, center[1]))
    }

    pub fn scale(&self) -> T {
        self.u.len().max(self.v.len()) * T::lit(0.5)
    }

    /// Row-major `n_u × n_v` lattice.
    pub fn grid(&self, nu: usize, nv: usize) -> Vec<[T; 2]> {
        let us = self.u.linspace(nu);
        let vs = self.v.linspace(nv);
        us.iter().flat_map(|&u| vs.iter().map(move |&v| [u, v])).collect()
    }
}

/// Singularity type the germ is declared to have at its base point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GermKind {
    CuspidalEdge,
    Swallowtail,
    CuspidalCrossCap,
    CrossCap,
    Regular,
    Unspecified,
}

/// How the unit normal is obtained.
#[derive(Clone)]
pub enum NormalRule<T: Real> {
    /// A supplied (not necessarily unit) normal vector field.
    Analytic(Arc<dyn Evaluable<T>>),
    /// `f_u × f_v / v`, valid when the singular set is `v = 0` and `f_v`
    /// vanishes there.
    VFactor,
    /// Normalized `f_u × f_v`, extended to singular points by directional
    /// limits.
    Limit,
}

/// Threshold for disagreement between directional normal limits.
pub const LIMIT_AGREEMENT: f64 = 1e-6;

#[derive(Clone)]
pub struct SurfaceGerm<T: Real> {
    name: String,
    map: Arc<dyn Evaluable<T>>,
    domain: Rect<T>,
    base: [T; 2],
    normal: NormalRule<T>,
    kind: GermKind,
    reference: Option<V3<T>>,
}

impl<T: Real> fmt::Debug for SurfaceGerm<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rule = match self.normal {
            NormalRule::Analytic(_) => "analytic",
            NormalRule::VFactor => "v-factor",
            NormalRule::Limit => "limit",
        };
        f.debug_struct("SurfaceGerm")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("base", &self.base)
            .field("normal", &rule)
            .field("kind", &self.kind)
            .finish()
    }
}

/// Frame data at a co-rank one singular point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistinguishedFrame<T> {
    pub frame: GermFrame<T>,
    /// Unit null direction in the domain.
    pub null_dir: [T; 2],
    /// Unit vector along `l₂` pointing into the image, when defined.
    pub cuspidal_direction: Option<V3<T>>,
}

fn cross_at<T: Real>(fu: &V3<T>, fv: &V3<T>) -> V3<T> {
    fu.cross(fv)
}

fn unit<T: Real>(v: V3<T>) -> Option<V3<T>> {
    let n = v.norm();
    (n > T::zero() && n.is_finite()).then(|| v.scale(T::one() / n))
}

impl<T: Real> SurfaceGerm<T> {
    /// A germ whose normal is obtained by the limit construction.
    pub fn new(name: &str, map: Arc<dyn Evaluable<T>>, domain: Rect<T>, base: [T; 2]) -> Result<Self, GermError> {
        if map.arity() != 2 || map.dim() != 3 {
            return Err(GermError::Shape {
                arity: map.arity(),
                dim: map.dim(),
            });
        }
        if !domain.contains(base) {
            return Err(GermError::OutOfDomain {
                u: base[0].to_f64_lossy(),
                v: base[1].to_f64_lossy(),
            });
        }
        let mut g = SurfaceGerm {
            name: name.to_string(),
            map,
            domain,
            base,
            normal: NormalRule::Limit,
            kind: GermKind::Unspecified,
            reference: None,
        };
        g.reference = g.raw_limit_normal(base[0], base[1]).ok();
        Ok(g)
    }

    pub fn from_mapdef(map: MapDef<T>, domain: Rect<T>, base: [T; 2]) -> Result<Self, GermError> {
        let name = map.name().to_string();
        Self::new(&name, Arc::new(map), domain, base)
    }

    /// Parses component expressions in `u, v`.
    pub fn parse(name: &str, comps: [&str; 3], params: &[(&str, T)], domain: Rect<T>) -> Result<Self, GermError> {
        let m = MapDef::parse(name, &["u", "v"], &comps, params)?;
        Self::from_mapdef(m, domain, [T::zero(), T::zero()])
    }

    pub fn with_normal(mut self, normal: Arc<dyn Evaluable<T>>) -> Result<Self, GermError> {
        if normal.arity() != 2 || normal.dim() != 3 {
            return Err(GermError::Shape {
                arity: normal.arity(),
                dim: normal.dim(),
            });
        }
        self.normal = NormalRule::Analytic(normal);
        Ok(self)
    }

    /// Analytic normal given as expressions in `u, v`.
    pub fn with_normal_exprs(self, comps: [&str; 3], params: &[(&str, T)]) -> Result<Self, GermError> {
        let m = MapDef::parse(&format!("{}_normal", self.name), &["u", "v"], &comps, params)?;
        self.with_normal(Arc::new(m))
    }

    pub fn with_vfactor_normal(mut self) -> Self {
        self.normal = NormalRule::VFactor;
        self
    }

    pub fn with_kind(mut self, kind: GermKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn with_domain(mut self, domain: Rect<T>) -> Result<Self, GermError> {
        if !domain.contains(self.base) {
            return Err(GermError::OutOfDomain {
                u: self.base[0].to_f64_lossy(),
                v: self.base[1].to_f64_lossy(),
            });
        }
        self.domain = domain;
        Ok(self)
    }

    pub fn with_base(mut self, base: [T; 2]) -> Result<Self, GermError> {
        if !self.domain.contains(base) {
            return Err(GermError::OutOfDomain {
                u: base[0].to_f64_lossy(),
                v: base[1].to_f64_lossy(),
            });
        }
        self.base = base;
        self.reference = self.raw_limit_normal(base[0], base[1]).ok();
        Ok(self)
    }

    pub fn renamed(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> Rect<T> {
        self.domain
    }

    pub fn base(&self) -> [T; 2] {
        self.base
    }

    pub fn kind(&self) -> GermKind {
        self.kind
    }

    pub fn map(&self) -> &Arc<dyn Evaluable<T>> {
        &self.map
    }

    pub fn normal_rule(&self) -> &NormalRule<T> {
        &self.normal
    }

    pub fn point(&self, u: T, v: T) -> Result<V3<T>, GermError> {
        let p = self.map.eval(&[u, v])?;
        Ok(V3([p[0], p[1], p[2]]))
    }

    /// Position jets for arbitrary input jets.
    pub fn point_jet(&self, u: Jet<T>, v: Jet<T>) -> Result<V3<Jet<T>>, GermError> {
        let p = map_jets(self.map.as_ref(), &[u, v])?;
        Ok(V3([p[0], p[1], p[2]]))
    }

    /// Taylor jet of `f` at `(u, v)` in two variables.
    pub fn jet(&self, u: T, v: T, order: usize) -> Result<V3<Jet<T>>, GermError> {
        self.point_jet(Jet::variable(u, 0, 2, order), Jet::variable(v, 1, 2, order))
    }

    /// `(f_u, f_v)`.
    pub fn tangents(&self, u: T, v: T) -> Result<(V3<T>, V3<T>), GermError> {
        let j = self.jet(u, v, 1)?;
        Ok((j.map(|c| c.partial(1, 0)), j.map(|c| c.partial(0, 1))))
    }

    fn at_err(u: T, v: T) -> (f64, f64) {
        (u.to_f64_lossy(), v.to_f64_lossy())
    }

    /// Normalized cross product, or `None` when `f_u × f_v` is negligible.
    fn regular_normal(&self, u: T, v: T) -> Result<Option<V3<T>>, GermError> {
        let (fu, fv) = self.tangents(u, v)?;
        let c = cross_at(&fu, &fv);
        let floor = T::lit(1e-10) * fu.norm() * fv.norm() + T::min_positive_value();
        if c.norm() <= floor {
            return Ok(None);
        }
        Ok(unit(c))
    }

    /// Limit normal at `(u, v)` up to sign.
    fn raw_limit_normal(&self, u: T, v: T) -> Result<V3<T>, GermError> {
        if let Some(n) = self.regular_normal(u, v)? {
            return Ok(n);
        }
        let h = self.domain.scale() * T::lit(1e-4);
        let mut limits: Vec<V3<T>> = Vec::new();
        for k in 0..8 {
            let ang = T::lit(k as f64 * std::f64::consts::FRAC_PI_4);
            let d = [ang.cos(), ang.sin()];
            let sample = |s: T| -> Result<Option<V3<T>>, GermError> {
                let (fu, fv) = self.tangents(u + s * d[0], v + s * d[1])?;
                let c = cross_at(&fu, &fv);
                if c.norm() <= T::lit(1e-14) * (T::one() + fu.norm() * fv.norm()) {
                    return Ok(None);
                }
                Ok(unit(c))
            };
            let (Some(n1), Some(n2), Some(n4)) = (sample(h)?, sample(h * T::lit(0.5))?, sample(h * T::lit(0.25))?) else {
                continue;
            };
            let align = |x: V3<T>| if x.dot(&n1) < T::zero() { -x } else { x };
            let (n2, n4) = (align(n2), align(n4));
            let r1 = n2.scale(T::lit(2.0)) - n1;
            let r2 = n4.scale(T::lit(2.0)) - n2;
            let r = (r2.scale(T::lit(4.0)) - r1).scale(T::one() / T::lit(3.0));
            if let Some(r) = unit(r) {
                limits.push(r);
            }
        }
        let (uf, vf) = Self::at_err(u, v);
        let first = *limits.first().ok_or(GermError::NotAFrontal {
            u: uf,
            v: vf,
            disagreement: f64::INFINITY,
        })?;
        let mut worst = T::zero();
        for l in &limits {
            let l = if l.dot(&first) < T::zero() { -*l } else { *l };
            worst = worst.max((l - first).norm());
        }
        if worst > T::lit(LIMIT_AGREEMENT) {
            return Err(GermError::NotAFrontal {
                u: uf,
                v: vf,
                disagreement: worst.to_f64_lossy(),
            });
        }
        Ok(first)
    }

    fn oriented(&self, n: V3<T>) -> V3<T> {
        match self.reference {
            Some(r) if n.dot(&r) < T::zero() => -n,
            _ => n,
        }
    }

    /// Unit normal `ν(u, v)`.
    pub fn normal(&self, u: T, v: T) -> Result<V3<T>, GermError> {
        let (uf, vf) = Self::at_err(u, v);
        match &self.normal {
            NormalRule::Analytic(m) => {
                let n = m.eval(&[u, v])?;
                unit(V3([n[0], n[1], n[2]])).ok_or(GermError::NotAFrontal {
                    u: uf,
                    v: vf,
                    disagreement: f64::INFINITY,
                })
            }
            NormalRule::VFactor => {
                let j = self.jet(u, v, 2)?;
                let fu = j.map(|c| c.partial(1, 0));
                let c = if v == T::zero() {
                    fu.cross(&j.map(|c| c.partial(0, 2)))
                } else {
                    fu.cross(&j.map(|c| c.partial(0, 1))).scale(T::one() / v)
                };
                unit(c).ok_or(GermError::NotAFrontal {
                    u: uf,
                    v: vf,
                    disagreement: f64::INFINITY,
                })
            }
            NormalRule::Limit => Ok(self.oriented(self.raw_limit_normal(u, v)?)),
        }
    }

    /// Signed area density `λ = det(f_u, f_v, ν)`.
    pub fn area_density(&self, u: T, v: T) -> Result<T, GermError> {
        let (fu, fv) = self.tangents(u, v)?;
        let c = cross_at(&fu, &fv);
        if let NormalRule::Limit = self.normal {
            // λ = ±|f_u × f_v| with the sign of the oriented normal
            let n = c.norm();
            if n == T::zero() {
                return Ok(T::zero());
            }
            return Ok(match self.reference {
                Some(r) if c.dot(&r) < T::zero() => -n,
                _ => n,
            });
        }
        Ok(c.dot(&self.normal(u, v)?))
    }

    /// Central-difference gradient of `λ`.
    pub fn area_density_grad(&self, u: T, v: T) -> Result<[T; 2], GermError> {
        let h = self.domain.scale() * T::lit(1e-5);
        let two_h = h + h;
        let du = (self.area_density(u + h, v)? - self.area_density(u - h, v)?) / two_h;
        let dv = (self.area_density(u, v + h)? - self.area_density(u, v - h)?) / two_h;
        Ok([du, dv])
    }

    /// `(E, F, G)`.
    pub fn first_fundamental_form(&self, u: T, v: T) -> Result<(T, T, T), GermError> {
        let (fu, fv) = self.tangents(u, v)?;
        Ok((fu.dot(&fu), fu.dot(&fv), fv.dot(&fv)))
    }

    /// Unit kernel direction of `df`: the eigenvector of the Gram matrix for
    /// its smaller eigenvalue, normalized to have positive `v` component
    /// (positive `u` component when `v`-component vanishes).
    pub fn null_direction(&self, u: T, v: T) -> Result<[T; 2], GermError> {
        let (e, f, g) = self.first_fundamental_form(u, v)?;
        Ok(null_vector(e, f, g))
    }

    /// Frame from `(f_ξ, ν)` where `ξ` is the null direction turned by −90°.
    pub fn distinguished_frame(&self, u: T, v: T) -> Result<DistinguishedFrame<T>, GermError> {
        let (uf, vf) = Self::at_err(u, v);
        let (e, f, g) = self.first_fundamental_form(u, v)?;
        let trace = e + g;
        let disc = ((e - g) * (e - g) * T::lit(0.25) + f * f).sqrt();
        let small = trace * T::lit(0.5) - disc;
        let large = trace * T::lit(0.5) + disc;
        if large <= T::lit(1e-20) {
            return Err(GermError::CorankTwo { u: uf, v: vf });
        }
        let lam = self.area_density(u, v)?;
        if small > T::lit(1e-16) * large && lam.abs() > T::lit(1e-8) * large {
            return Err(GermError::RegularPoint { u: uf, v: vf });
        }
        let eta = null_vector(e, f, g);
        let xi = [eta[1], -eta[0]];
        let (fu, fv) = self.tangents(u, v)?;
        let fxi = fu.scale(xi[0]) + fv.scale(xi[1]);
        let t = unit(fxi).ok_or(GermError::CorankTwo { u: uf, v: vf })?;
        let nu0 = self.normal(u, v)?;
        let nu = unit(nu0 - t.scale(nu0.dot(&t))).ok_or(GermError::CorankTwo { u: uf, v: vf })?;
        let frame = GermFrame::new(self.point(u, v)?, t, nu)?;
        let s = Jet::variable(T::zero(), 0, 1, 2);
        let j = self.point_jet(s * eta[0] + u, s * eta[1] + v)?;
        let fee = j.map(|c| c.partial(2, 0));
        let s = fee.dot(&frame.w);
        let cusp = (s.abs() > T::lit(1e-9) * (T::one() + fee.norm())).then(|| {
            if s > T::zero() {
                frame.w
            } else {
                -frame.w
            }
        });
        Ok(DistinguishedFrame {
            frame,
            null_dir: eta,
            cuspidal_direction: cusp,
        })
    }

    /// Distinguished frame at the base point.
    pub fn base_frame(&self) -> Result<DistinguishedFrame<T>, GermError> {
        self.distinguished_frame(self.base[0], self.base[1])
    }
}

pub(crate) fn null_vector<T: Real>(e: T, f: T, g: T) -> [T; 2] {
    let mu = (e + g) * T::lit(0.5) - ((e - g) * (e - g) * T::lit(0.25) + f * f).sqrt();
    let a = [f, mu - e];
    let b = [mu - g, f];
    let na = (a[0] * a[0] + a[1] * a[1]).sqrt();
    let nb = (b[0] * b[0] + b[1] * b[1]).sqrt();
    let (x, n) = if na >= nb { (a, na) } else { (b, nb) };
    let mut eta = if n <= T::lit(1e-300) {
        if e <= g {
            [T::one(), T::zero()]
        } else {
            [T::zero(), T::one()]
        }
    } else {
        [x[0] / n, x[1] / n]
    };
    let tiny = T::lit(1e-12);
    if eta[1] < -tiny || (eta[1].abs() <= tiny && eta[0] < T::zero()) {
        eta = [-eta[0], -eta[1]];
    }
    eta
}

#[cfg(test)]
mod tests;
