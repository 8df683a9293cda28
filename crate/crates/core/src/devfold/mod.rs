//! Developable strips `F(u, v) = c(u) + v ξ(u)` in normal form, the map from
//! cuspidal edges to their osculating strips, and curved foldings.

mod mesh;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{CurveError, SpaceCurve};
use crate::isomer::{self, IsomerError};
use crate::normalform::{EdgeNormalForm, NormalFormError, ScalarFn, STATIONS};
use crate::numkit::{map_jets, Evaluable, Interval, Jet, NumError};
use crate::scalar::{Real, Scalar, V3};

pub use mesh::{format_g9, write_obj, write_profiles_csv, MeshGrid, StripProfileRow};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DevError {
    #[error("first angular function vanishes (sin α = 0) at u = {at}")]
    AlphaVanishes { at: f64 },
    #[error("cuspidal angle {theta} at u = {at} is outside 0 < |θ| < π/2")]
    ThetaOutOfRange { at: f64, theta: f64 },
    #[error("edge is not strictly admissible")]
    NotStrictlyAdmissible,
    #[error("|v| = {v} exceeds the strip half-width {halfwidth}")]
    OutOfWidth { v: f64, halfwidth: f64 },
    #[error("metric degenerates at ({u}, {v})")]
    DegenerateMetric { u: f64, v: f64 },
    #[error("strip was not produced from an edge normal form")]
    MissingSource,
    #[error(transparent)]
    Isomer(#[from] IsomerError),
    #[error(transparent)]
    NormalForm(#[from] NormalFormError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Num(#[from] NumError),
}

/// `β ∈ (0, π)` with `cot β = (α' + τ) / (κ sin α)`.
pub fn second_angle<T: Real>(alpha: T, alpha_prime: T, kappa: T, tau: T) -> Result<T, DevError> {
    let s = alpha.sin();
    if s == T::zero() || !(kappa > T::zero()) {
        return Err(DevError::AlphaVanishes { at: f64::NAN });
    }
    Ok(T::FRAC_PI_2() - ((alpha_prime + tau) / (kappa * s)).atan())
}

/// A developable strip in normal form.
#[derive(Debug, Clone)]
pub struct DevStrip<T: Real> {
    pub crease: SpaceCurve<T>,
    pub alpha: ScalarFn<T>,
    pub halfwidth: T,
    /// The edge this strip osculates, when built by [`ist`].
    pub source: Option<Arc<EdgeNormalForm<T>>>,
    pub warnings: Vec<String>,
}

/// Angular data of a strip at one station.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StripSample<T> {
    pub u: T,
    pub alpha: T,
    pub alpha_prime: T,
    pub beta: T,
    pub kappa: T,
    pub tau: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StripCheck {
    pub alpha_in_range: bool,
    pub beta_in_range: bool,
    pub max_beta_residual: f64,
    pub min_ruling_normal: f64,
}

impl StripCheck {
    pub fn ok(&self, tol: f64) -> bool {
        self.alpha_in_range && self.beta_in_range && self.max_beta_residual < tol && self.min_ruling_normal > 0.0
    }
}

impl<T: Real> DevStrip<T> {
    pub fn new(crease: SpaceCurve<T>, alpha: ScalarFn<T>, halfwidth: T) -> Result<Self, DevError> {
        if !crease.is_arclength() {
            return Err(NormalFormError::NotArclength.into());
        }
        Ok(DevStrip {
            crease,
            alpha,
            halfwidth,
            source: None,
            warnings: Vec::new(),
        })
    }

    pub fn domain(&self) -> Interval<T> {
        self.crease.domain()
    }

    pub fn stations(&self, n: usize) -> Vec<T> {
        self.domain().linspace(n)
    }

    /// `α` and `α'` as series in `h = u - u0`.
    fn alpha_series(&self, u0: T, order: usize) -> Result<(Jet<T>, Jet<T>), DevError> {
        let a = self
            .alpha
            .eval(Jet::variable(u0, 0, 1, order + 1), Jet::constant(T::zero()))
            .map_err(NormalFormError::from)?;
        let mut d = a.derivative(0);
        if d.nvars() == 0 {
            d = Jet::variable(u0, 0, 1, order) * T::zero() + d.value();
        }
        Ok((a.truncate(order), d))
    }

    pub fn sample(&self, u: T) -> Result<StripSample<T>, DevError> {
        let (a, da) = self.alpha_series(u, 0)?;
        let f = self.crease.frenet(u)?;
        let (alpha, alpha_prime) = (a.value(), da.value());
        let beta = second_angle(alpha, alpha_prime, f.kappa, f.tau).map_err(|_| DevError::AlphaVanishes { at: u.to_f64_lossy() })?;
        Ok(StripSample {
            u,
            alpha,
            alpha_prime,
            beta,
            kappa: f.kappa,
            tau: f.tau,
        })
    }

    /// Unit ruling direction as jets in the variables of `u`.
    pub fn ruling_jet(&self, u: &Jet<T>) -> Result<V3<Jet<T>>, DevError> {
        let u0 = u.value();
        let order = if u.nvars() == 0 { 0 } else { u.order() };
        let fs = self.crease.frenet_series(u0, order)?;
        let (a, da) = self.alpha_series(u0, order)?;
        let sin_a = a.sin();
        if sin_a.value() == T::zero() {
            return Err(DevError::AlphaVanishes { at: u0.to_f64_lossy() });
        }
        let cot_b = (da + fs.tau) / (fs.kappa * sin_a);
        let beta = Jet::constant(T::FRAC_PI_2()) - cot_b.atan();
        let (cb, sb) = (beta.cos(), beta.sin());
        let (ca, sa) = (a.cos(), sin_a);
        let xi = fs.e.scale(cb) + (fs.n.scale(ca) + fs.b.scale(sa)).scale(sb);
        Ok(xi.map(|j| j.compose_series_at(u, u0)))
    }

    pub fn ruling(&self, u: T) -> Result<V3<T>, DevError> {
        Ok(self.ruling_jet(&Jet::constant(u))?.map(|j| j.value()))
    }

    pub fn eval_jets(&self, u: Jet<T>, v: Jet<T>) -> Result<V3<Jet<T>>, DevError> {
        let c = self.crease.point_jet(&u)?;
        let xi = self.ruling_jet(&u)?;
        Ok(c + xi.scale(v))
    }

    pub fn point(&self, u: T, v: T) -> Result<V3<T>, DevError> {
        if v.abs() > self.halfwidth * (T::one() + T::lit(1e-12)) {
            return Err(DevError::OutOfWidth {
                v: v.to_f64_lossy(),
                halfwidth: self.halfwidth.to_f64_lossy(),
            });
        }
        Ok(self.eval_jets(Jet::variable(u, 0, 2, 0), Jet::variable(v, 1, 2, 0))?.map(|j| j.value()))
    }

    pub fn gaussian_curvature(&self, u: T, v: T) -> Result<T, DevError> {
        gaussian_curvature_of(&StripMap { strip: self.clone() }, u, v)
    }

    /// Checks the normal-form conditions at `n` stations.
    pub fn check(&self, n: usize) -> Result<StripCheck, DevError> {
        let mut out = StripCheck {
            alpha_in_range: true,
            beta_in_range: true,
            max_beta_residual: 0.0,
            min_ruling_normal: f64::INFINITY,
        };
        for u in self.stations(n) {
            let s = self.sample(u)?;
            let a = s.alpha.abs();
            out.alpha_in_range &= a > T::zero() && a < T::FRAC_PI_2();
            out.beta_in_range &= s.beta > T::zero() && s.beta < T::PI();
            let r = (T::one() / s.beta.tan() - (s.alpha_prime + s.tau) / (s.kappa * s.alpha.sin())).abs();
            out.max_beta_residual = out.max_beta_residual.max(r.to_f64_lossy());
            let xi = self.ruling(u)?;
            let n = self.crease.frenet(u)?.n;
            out.min_ruling_normal = out.min_ruling_normal.min(xi.dot(&n).to_f64_lossy());
        }
        Ok(out)
    }

    /// Smallest `|v|` at which the strip metric degenerates, over `n`
    /// stations; infinite when the rulings never focus.
    pub fn focal_distance(&self, n: usize) -> Result<T, DevError> {
        let mut best = T::infinity();
        for u in self.stations(n) {
            let xi = self.ruling_jet(&Jet::variable(u, 0, 1, 1))?;
            let x0 = xi.map(|j| j.value());
            let x1 = xi.map(|j| j.partial(1, 0));
            let e = self.crease.frenet(u)?.e;
            // (e + v ξ') × ξ = 0
            let a = e.cross(&x0);
            let b = x1.cross(&x0);
            let bb = b.norm2();
            if bb <= T::epsilon() {
                continue;
            }
            let v = -a.dot(&b) / bb;
            if (a + b.scale(v)).norm() <= T::lit(1e-6) * a.norm() {
                best = best.min(v.abs());
            }
        }
        Ok(best)
    }

    /// Strip with `α ↦ -α`.
    pub fn dual(&self) -> Self {
        DevStrip {
            crease: self.crease.clone(),
            alpha: self.alpha.negated(),
            halfwidth: self.halfwidth,
            source: None,
            warnings: Vec::new(),
        }
    }

    pub fn profiles(&self, n: usize) -> Result<Vec<StripProfileRow>, DevError> {
        self.stations(n)
            .into_iter()
            .map(|u| {
                let s = self.sample(u)?;
                Ok(StripProfileRow {
                    u: u.to_f64_lossy(),
                    alpha: s.alpha.to_f64_lossy(),
                    beta: s.beta.to_f64_lossy(),
                    kappa: s.kappa.to_f64_lossy(),
                    tau: s.tau.to_f64_lossy(),
                })
            })
            .collect()
    }

    /// Samples the strip on an `nu × nv` lattice.
    pub fn mesh(&self, nu: usize, nv: usize) -> Result<MeshGrid, DevError> {
        let us = self.stations(nu);
        let vs = Interval::new(-self.halfwidth, self.halfwidth).linspace(nv);
        MeshGrid::build(&us, &vs, |u, v| self.point(u, v))
    }
}

struct StripMap<T: Real> {
    strip: DevStrip<T>,
}

impl<T: Real> Evaluable<T> for StripMap<T> {
    fn arity(&self) -> usize {
        2
    }
    fn dim(&self) -> usize {
        3
    }
    fn eval(&self, x: &[T]) -> Result<Vec<T>, NumError> {
        self.strip
            .eval_jets(Jet::constant(x[0]), Jet::constant(x[1]))
            .map(|p| p.0.iter().map(|j| j.value()).collect())
            .map_err(|e| NumError::Domain(e.to_string()))
    }
    fn eval_jet(&self, x: &[Jet<T>]) -> Option<Result<Vec<Jet<T>>, NumError>> {
        Some(
            self.strip
                .eval_jets(x[0], x[1])
                .map(|p| p.0.to_vec())
                .map_err(|e| NumError::Domain(e.to_string())),
        )
    }
}

/// Gaussian curvature `(LN - M²)/(EG - F²)` of a parametrized surface.
pub fn gaussian_curvature_of<T: Real>(map: &dyn Evaluable<T>, u: T, v: T) -> Result<T, DevError> {
    let j = map_jets(map, &[Jet::variable(u, 0, 2, 2), Jet::variable(v, 1, 2, 2)])?;
    let d = |i: usize, k: usize| V3([j[0].partial(i, k), j[1].partial(i, k), j[2].partial(i, k)]);
    let (fu, fv) = (d(1, 0), d(0, 1));
    let (e, f, g) = (fu.dot(&fu), fu.dot(&fv), fv.dot(&fv));
    let det = e * g - f * f;
    if !(det > T::epsilon() * T::lit(1e4) * (e + g) * (e + g)) {
        return Err(DevError::DegenerateMetric {
            u: u.to_f64_lossy(),
            v: v.to_f64_lossy(),
        });
    }
    let n = fu.cross(&fv).scale(T::one() / det.sqrt());
    let (l, m, nn) = (d(2, 0).dot(&n), d(1, 1).dot(&n), d(0, 2).dot(&n));
    Ok((l * nn - m * m) / det)
}

/// The osculating developable strip of an edge: `α = θ`.
pub fn ist<T: Real>(nf: &EdgeNormalForm<T>) -> Result<DevStrip<T>, DevError> {
    let mut sign = T::zero();
    for u in nf.stations(STATIONS) {
        let th = nf.theta_at(u)?;
        let bad = !(th.abs() > T::zero() && th.abs() < T::FRAC_PI_2()) || sign * th < T::zero();
        if bad {
            return Err(DevError::ThetaOutOfRange {
                at: u.to_f64_lossy(),
                theta: th.to_f64_lossy(),
            });
        }
        sign = th.signum();
    }
    if !isomer::admissibility(nf, STATIONS)?.strict {
        return Err(DevError::NotStrictlyAdmissible);
    }
    let mut strip = DevStrip::new(nf.crease.clone(), nf.theta.clone(), nf.halfwidth)?;
    strip.source = Some(Arc::new(nf.clone()));
    let focal = strip.focal_distance(STATIONS)?;
    let limit = focal * T::lit(0.5);
    if strip.halfwidth > limit {
        strip.warnings.push(format!(
            "half-width {} truncated to {} (rulings focus at distance {})",
            strip.halfwidth.to_f64_lossy(),
            limit.to_f64_lossy(),
            focal.to_f64_lossy()
        ));
        strip.halfwidth = limit;
    }
    Ok(strip)
}

/// Strips of the dual, inverse and inverse-dual edges.
#[derive(Debug, Clone)]
pub struct StripIsomers<T: Real> {
    pub dual: DevStrip<T>,
    pub inverse: DevStrip<T>,
    pub inverse_dual: DevStrip<T>,
}

pub fn strip_isomers<T: Real>(strip: &DevStrip<T>) -> Result<StripIsomers<T>, DevError> {
    let nf = strip.source.as_ref().ok_or(DevError::MissingSource)?;
    Ok(StripIsomers {
        dual: ist(&isomer::dual(nf)?)?,
        inverse: ist(&isomer::inverse(nf)?)?,
        inverse_dual: ist(&isomer::inverse_dual(nf)?)?,
    })
}

/// Which piece of a curved folding is used where.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    /// `F` for `u > 0`, the dual strip for `u < 0`.
    U,
    /// `F` for `v ≥ 0`, the dual strip for `v < 0`.
    V,
}

/// A strip glued to its dual along the crease.
#[derive(Debug, Clone)]
pub struct CurvedFolding<T: Real> {
    pub strip: DevStrip<T>,
    pub dual: DevStrip<T>,
    pub split: Split,
}

pub fn curved_folding<T: Real>(strip: &DevStrip<T>, split: Split) -> Result<CurvedFolding<T>, DevError> {
    let dual = match &strip.source {
        Some(nf) => {
            let mut d = ist(&isomer::dual(nf)?)?;
            d.halfwidth = d.halfwidth.min(strip.halfwidth);
            d
        }
        None => strip.dual(),
    };
    Ok(CurvedFolding {
        strip: strip.clone(),
        dual,
        split,
    })
}

impl<T: Real> CurvedFolding<T> {
    pub fn piece(&self, u: T, v: T) -> &DevStrip<T> {
        let first = match self.split {
            Split::U => u >= T::zero(),
            Split::V => v >= T::zero(),
        };
        if first {
            &self.strip
        } else {
            &self.dual
        }
    }

    pub fn point(&self, u: T, v: T) -> Result<V3<T>, DevError> {
        self.piece(u, v).point(u, v)
    }

    /// The two pieces as separate meshes, each over its own half.
    pub fn meshes(&self, nu: usize, nv: usize) -> Result<[MeshGrid; 2], DevError> {
        let d = self.strip.domain();
        let w = self.strip.halfwidth.min(self.dual.halfwidth);
        let (ua, ub, va, vb) = match self.split {
            Split::U => {
                let mid = d.clamp(T::zero());
                (
                    Interval::new(mid, d.hi),
                    Interval::new(d.lo, mid),
                    Interval::new(-w, w),
                    Interval::new(-w, w),
                )
            }
            Split::V => (d, d, Interval::new(T::zero(), w), Interval::new(-w, T::zero())),
        };
        Ok([
            MeshGrid::build(&ua.linspace(nu), &va.linspace(nv), |u, v| self.strip.point(u, v))?,
            MeshGrid::build(&ub.linspace(nu), &vb.linspace(nv), |u, v| self.dual.point(u, v))?,
        ])
    }
}

#[cfg(test)]
mod tests;
