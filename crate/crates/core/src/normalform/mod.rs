//! Normal form `f = c + (v²a, v³b)·R(θ)·(n, b)ᵀ` of a generalized cuspidal
//! edge, its extraction from a germ, and the derived invariants.

mod extract;
mod scalar_fn;

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::curve::{CurveError, SpaceCurve};
use crate::exprlang::ExprError;
use crate::germ::{GermError, GermKind, Rect, SurfaceGerm};
use crate::numkit::{Evaluable, Interval, Jet, NumError};
use crate::scalar::{Real, Scalar, V3};

pub use extract::{half_arclength, sectional_cusp, to_normal_form, to_normal_form_with, SectionalCusp, CUSP_ORDER};
pub use scalar_fn::ScalarFn;

/// Default number of stations along the crease.
pub const STATIONS: usize = 129;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NormalFormError {
    #[error("crease must be parametrized by arc length")]
    NotArclength,
    #[error("degenerate cusp at {at}: second derivative vanishes")]
    DegenerateCusp { at: f64 },
    #[error("f_v does not vanish along v = 0 (at u = {at}); coordinates are not edge coordinates")]
    NotEdgeCoordinates { at: f64 },
    #[error("station {s} outside the crease range [{lo}, {hi}]")]
    OutOfRange { s: f64, lo: f64, hi: f64 },
    #[error("sectional data (a, b) is not available for this normal form")]
    MissingSectionalData,
    #[error("station range is not symmetric about 0: [{lo}, {hi}]")]
    AsymmetricStations { lo: f64, hi: f64 },
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Germ(#[from] GermError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Num(#[from] NumError),
}

/// Crease curve, cuspidal angle and sectional functions.
#[derive(Debug, Clone)]
pub struct EdgeNormalForm<T: Real> {
    pub crease: SpaceCurve<T>,
    pub theta: ScalarFn<T>,
    pub a: Option<ScalarFn<T>>,
    pub b: Option<ScalarFn<T>>,
    pub halfwidth: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeInvariants<T> {
    pub theta: T,
    pub kappa: T,
    pub kappa_s: T,
    pub kappa_nu: T,
}

/// Sampled description of a normal form, for reports.
#[derive(Debug, Clone, Serialize)]
pub struct NormalFormReport {
    pub crease: String,
    pub halfwidth: f64,
    pub stations: Vec<f64>,
    pub crease_points: Vec<[f64; 3]>,
    pub theta: Vec<f64>,
    pub kappa: Vec<f64>,
    pub tau: Vec<f64>,
    pub kappa_s: Vec<f64>,
    pub kappa_nu: Vec<f64>,
    pub a0: Option<Vec<f64>>,
    pub b0: Option<Vec<f64>>,
}

impl<T: Real> EdgeNormalForm<T> {
    pub fn new(
        crease: SpaceCurve<T>,
        theta: ScalarFn<T>,
        a: Option<ScalarFn<T>>,
        b: Option<ScalarFn<T>>,
        halfwidth: T,
    ) -> Result<Self, NormalFormError> {
        if !crease.is_arclength() {
            return Err(NormalFormError::NotArclength);
        }
        Ok(EdgeNormalForm {
            crease,
            theta,
            a,
            b,
            halfwidth,
        })
    }

    pub fn domain(&self) -> Interval<T> {
        self.crease.domain()
    }

    pub fn stations(&self, n: usize) -> Vec<T> {
        self.domain().linspace(n)
    }

    pub fn theta_at(&self, u: T) -> Result<T, NormalFormError> {
        Ok(self.theta.value(u, T::zero())?)
    }

    /// `θ` and its `u`-derivatives as a univariate jet about `u`.
    pub fn theta_jet(&self, u: T, order: usize) -> Result<Jet<T>, NormalFormError> {
        Ok(self.theta.eval(Jet::variable(u, 0, 1, order), Jet::constant(T::zero()))?)
    }

    /// `(θ, κ, κ_s = κ cos θ, κ_ν = κ sin θ)`.
    pub fn edge_invariants(&self, u: T) -> Result<EdgeInvariants<T>, NormalFormError> {
        let theta = self.theta_at(u)?;
        let kappa = self.crease.frenet(u)?.kappa;
        Ok(EdgeInvariants {
            theta,
            kappa,
            kappa_s: kappa * theta.cos(),
            kappa_nu: kappa * theta.sin(),
        })
    }

    /// `|b(u, 0)| > tol`; `None` when `b` is unknown.
    pub fn is_cuspidal_edge(&self, u: T, tol: T) -> Option<bool> {
        let b = self.b.as_ref()?;
        Some(b.value(u, T::zero()).ok()?.abs() > tol)
    }

    /// The same surface in coordinates `(u, -v)`.
    pub fn t_flip(&self) -> Self {
        let one = T::one();
        EdgeNormalForm {
            crease: self.crease.clone(),
            theta: self.theta.clone(),
            a: self.a.as_ref().map(|a| a.transformed(one, T::zero(), -one, one)),
            b: self.b.as_ref().map(|b| b.transformed(one, T::zero(), -one, -one)),
            halfwidth: self.halfwidth,
        }
    }

    /// The same surface in coordinates `(-u, v)` over the reversed crease.
    pub fn station_reversed(&self) -> Self {
        let one = T::one();
        EdgeNormalForm {
            crease: self.crease.reversed(),
            theta: self.theta.transformed(-one, T::zero(), one, -one),
            a: self.a.as_ref().map(|a| a.transformed(-one, T::zero(), one, one)),
            b: self.b.as_ref().map(|b| b.transformed(-one, T::zero(), one, -one)),
            halfwidth: self.halfwidth,
        }
    }

    /// Evaluates the normal form on jets.
    pub fn eval_jets(&self, u: Jet<T>, v: Jet<T>) -> Result<V3<Jet<T>>, NormalFormError> {
        let (a, b) = match (&self.a, &self.b) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(NormalFormError::MissingSectionalData),
        };
        let u0 = u.value();
        let order = if u.nvars() == 0 { 0 } else { u.order() };
        let fs = self.crease.frenet_series(u0, order)?.compose(&u);
        let th = self.theta.eval(u, v)?;
        let (ct, st) = (th.cos(), th.sin());
        let d = fs.n.scale(ct) - fs.b.scale(st);
        let dp = fs.n.scale(st) + fs.b.scale(ct);
        let v2 = v * v;
        let av = a.eval(u, v)? * v2;
        let bv = b.eval(u, v)? * v2 * v;
        Ok(fs.c + d.scale(av) + dp.scale(bv))
    }

    pub fn point(&self, u: T, v: T) -> Result<V3<T>, NormalFormError> {
        Ok(self.eval_jets(Jet::variable(u, 0, 2, 0), Jet::variable(v, 1, 2, 0))?.map(|j| j.value()))
    }

    pub fn report(&self, n: usize) -> Result<NormalFormReport, NormalFormError> {
        let st = self.stations(n);
        let mut r = NormalFormReport {
            crease: self.crease.name().to_string(),
            halfwidth: self.halfwidth.to_f64_lossy(),
            stations: Vec::with_capacity(n),
            crease_points: Vec::with_capacity(n),
            theta: Vec::with_capacity(n),
            kappa: Vec::with_capacity(n),
            tau: Vec::with_capacity(n),
            kappa_s: Vec::with_capacity(n),
            kappa_nu: Vec::with_capacity(n),
            a0: self.a.as_ref().map(|_| Vec::with_capacity(n)),
            b0: self.b.as_ref().map(|_| Vec::with_capacity(n)),
        };
        for &u in &st {
            let inv = self.edge_invariants(u)?;
            let fr = self.crease.frenet(u)?;
            r.stations.push(u.to_f64_lossy());
            r.crease_points.push(self.crease.point(u)?.to_f64());
            r.theta.push(inv.theta.to_f64_lossy());
            r.kappa.push(inv.kappa.to_f64_lossy());
            r.tau.push(fr.tau.to_f64_lossy());
            r.kappa_s.push(inv.kappa_s.to_f64_lossy());
            r.kappa_nu.push(inv.kappa_nu.to_f64_lossy());
            if let (Some(out), Some(a)) = (r.a0.as_mut(), &self.a) {
                out.push(a.value(u, T::zero())?.to_f64_lossy());
            }
            if let (Some(out), Some(b)) = (r.b0.as_mut(), &self.b) {
                out.push(b.value(u, T::zero())?.to_f64_lossy());
            }
        }
        Ok(r)
    }
}

struct NormalFormMap<T: Real> {
    nf: EdgeNormalForm<T>,
}

impl<T: Real> Evaluable<T> for NormalFormMap<T> {
    fn arity(&self) -> usize {
        2
    }
    fn dim(&self) -> usize {
        3
    }
    fn eval(&self, x: &[T]) -> Result<Vec<T>, NumError> {
        let p = self.nf.point(x[0], x[1]).map_err(|e| NumError::Domain(e.to_string()))?;
        Ok(p.0.to_vec())
    }
    fn eval_jet(&self, x: &[Jet<T>]) -> Option<Result<Vec<Jet<T>>, NumError>> {
        Some(
            self.nf
                .eval_jets(x[0], x[1])
                .map(|p| p.0.to_vec())
                .map_err(|e| NumError::Domain(e.to_string())),
        )
    }
}

/// The surface germ realized by a normal form, singular along `v = 0`.
pub fn from_normal_form<T: Real>(nf: &EdgeNormalForm<T>) -> Result<SurfaceGerm<T>, NormalFormError> {
    if nf.a.is_none() || nf.b.is_none() {
        return Err(NormalFormError::MissingSectionalData);
    }
    let dom = Rect::new(nf.domain(), Interval::new(-nf.halfwidth, nf.halfwidth));
    let base = [nf.domain().mid(), T::zero()];
    let map = Arc::new(NormalFormMap { nf: nf.clone() });
    Ok(SurfaceGerm::new(&format!("nf[{}]", nf.crease.name()), map, dom, base)?
        .with_vfactor_normal()
        .with_kind(GermKind::CuspidalEdge))
}
