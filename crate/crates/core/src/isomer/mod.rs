//! Isomers of a generalized cuspidal edge along a fixed crease: the dual,
//! inverse and inverse dual, together with class counting.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{match_profiles, CurveError, CurveSymmetry, Profile};
use crate::normalform::{EdgeNormalForm, NormalFormError, ScalarFn, STATIONS};
use crate::numkit::Interval;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IsomerError {
    #[error("edge is not admissible: max |κ_s| = {max_kappa_s} is not below min κ = {min_kappa}")]
    NotAdmissible { max_kappa_s: f64, min_kappa: f64 },
    #[error("limiting normal curvature vanishes near u = {at}")]
    KappaNuZero { at: f64 },
    #[error("sign of the inverse angle is undecidable at u = {at}: θ(-u) = 0")]
    SignUndecidable { at: f64 },
    #[error("station range [{lo}, {hi}] is not symmetric about 0")]
    AsymmetricStations { lo: f64, hi: f64 },
    #[error(transparent)]
    NormalForm(#[from] NormalFormError),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

impl From<crate::exprlang::ExprError> for IsomerError {
    fn from(e: crate::exprlang::ExprError) -> Self {
        IsomerError::NormalForm(e.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Admissibility {
    pub admissible: bool,
    pub strict: bool,
    pub max_abs_kappa_s: f64,
    pub min_abs_kappa_s: f64,
    pub min_kappa: f64,
}

/// `max |κ_s| < min κ`, and strictly so when additionally `min |κ_s| > 0`,
/// evaluated on `stations` points. A sign change of `κ_s` between stations
/// counts as a zero.
pub fn admissibility<T: Real>(nf: &EdgeNormalForm<T>, stations: usize) -> Result<Admissibility, IsomerError> {
    let mut max_ks = T::zero();
    let mut min_ks = T::infinity();
    let mut min_k = T::infinity();
    let mut prev: Option<T> = None;
    for u in nf.stations(stations) {
        let inv = nf.edge_invariants(u)?;
        if prev.is_some_and(|p| p * inv.kappa_s <= T::zero()) {
            min_ks = T::zero();
        }
        prev = Some(inv.kappa_s);
        max_ks = max_ks.max(inv.kappa_s.abs());
        min_ks = min_ks.min(inv.kappa_s.abs());
        min_k = min_k.min(inv.kappa);
    }
    let admissible = max_ks < min_k;
    Ok(Admissibility {
        admissible,
        strict: admissible && min_ks > T::zero(),
        max_abs_kappa_s: max_ks.to_f64_lossy(),
        min_abs_kappa_s: min_ks.to_f64_lossy(),
        min_kappa: min_k.to_f64_lossy(),
    })
}

/// `(admissible, strict)` at the default station count.
pub fn admissible<T: Real>(nf: &EdgeNormalForm<T>) -> Result<(bool, bool), IsomerError> {
    let a = admissibility(nf, STATIONS)?;
    Ok((a.admissible, a.strict))
}

fn require_admissible<T: Real>(nf: &EdgeNormalForm<T>) -> Result<(), IsomerError> {
    let a = admissibility(nf, STATIONS)?;
    if !a.admissible {
        return Err(IsomerError::NotAdmissible {
            max_kappa_s: a.max_abs_kappa_s,
            min_kappa: a.min_kappa,
        });
    }
    Ok(())
}

/// The dual: same crease, `θ ↦ -θ`, sections reflected in the osculating
/// plane (`a(u, -v)`, `b(u, -v)`).
pub fn dual<T: Real>(nf: &EdgeNormalForm<T>) -> Result<EdgeNormalForm<T>, IsomerError> {
    let tiny = T::lit(1e-12);
    let mut prev: Option<T> = None;
    for u in nf.stations(STATIONS) {
        let th = nf.theta_at(u)?;
        let s = th.sin();
        if s.abs() <= tiny || prev.is_some_and(|p| p * s < T::zero()) {
            return Err(IsomerError::KappaNuZero { at: u.to_f64_lossy() });
        }
        prev = Some(s);
    }
    let one = T::one();
    Ok(EdgeNormalForm {
        crease: nf.crease.clone(),
        theta: nf.theta.negated(),
        a: nf.a.as_ref().map(|a| a.transformed(one, T::zero(), -one, one)),
        b: nf.b.as_ref().map(|b| b.transformed(one, T::zero(), -one, one)),
        halfwidth: nf.halfwidth,
    })
}

/// The inverse: crease traversed backwards and
/// `cos θ_*(u) = κ(u)/κ(-u) · cos θ(u)` with `θ(-u) θ_*(u) > 0`.
/// Sectional data is not determined and is left unset.
pub fn inverse<T: Real>(nf: &EdgeNormalForm<T>) -> Result<EdgeNormalForm<T>, IsomerError> {
    let d = nf.domain();
    if !is_symmetric(d) {
        return Err(IsomerError::AsymmetricStations {
            lo: d.lo.to_f64_lossy(),
            hi: d.hi.to_f64_lossy(),
        });
    }
    require_admissible(nf)?;
    let us = nf.stations(STATIONS);
    let mut thetas = Vec::with_capacity(us.len());
    for &u in &us {
        let back = nf.theta_at(-u)?;
        if back == T::zero() {
            return Err(IsomerError::SignUndecidable { at: u.to_f64_lossy() });
        }
        let k = nf.crease.frenet(u)?.kappa;
        let km = nf.crease.frenet(-u)?.kappa;
        let c = (k / km * nf.theta_at(u)?.cos()).max(-T::one()).min(T::one());
        thetas.push(c.acos() * back.signum());
    }
    Ok(EdgeNormalForm {
        crease: nf.crease.reversed(),
        theta: ScalarFn::spline(us, thetas),
        a: None,
        b: None,
        halfwidth: nf.halfwidth,
    })
}

/// The inverse of the dual.
pub fn inverse_dual<T: Real>(nf: &EdgeNormalForm<T>) -> Result<EdgeNormalForm<T>, IsomerError> {
    inverse(&dual(nf)?)
}

/// A normal form and its three isomers.
#[derive(Debug, Clone)]
pub struct IsomerSet<T: Real> {
    pub base: EdgeNormalForm<T>,
    pub dual: EdgeNormalForm<T>,
    pub inverse: EdgeNormalForm<T>,
    pub inverse_dual: EdgeNormalForm<T>,
    /// Whether each member induces the base orientation on the crease.
    pub faithful: [bool; 4],
}

impl<T: Real> IsomerSet<T> {
    pub fn new(nf: &EdgeNormalForm<T>) -> Result<Self, IsomerError> {
        let d = dual(nf)?;
        Ok(IsomerSet {
            base: nf.clone(),
            inverse: inverse(nf)?,
            inverse_dual: inverse(&d)?,
            dual: d,
            faithful: [true, true, false, false],
        })
    }

    pub fn members(&self) -> [&EdgeNormalForm<T>; 4] {
        [&self.base, &self.dual, &self.inverse, &self.inverse_dual]
    }
}

pub const MEMBER_NAMES: [&str; 4] = ["base", "dual", "inverse", "inverse_dual"];

fn profile<T: Real>(nf: &EdgeNormalForm<T>) -> Result<Profile<T>, IsomerError> {
    Profile::sample(nf.domain(), STATIONS, |u| -> Result<Vec<T>, IsomerError> {
        let f = nf.crease.frenet(u)?;
        Ok(vec![f.kappa, f.tau, nf.theta_at(u)?])
    })
}

/// Whether two normal forms have the same `(κ, τ, θ)` profiles up to
/// `u ↦ ±u + c`.
pub fn same_profiles<T: Real>(a: &EdgeNormalForm<T>, b: &EdgeNormalForm<T>, tol: T) -> Result<bool, IsomerError> {
    let (pa, pb) = (profile(a)?, profile(b)?);
    let signs = [T::one(); 3];
    Ok([T::one(), -T::one()]
        .into_iter()
        .any(|sigma| match_profiles(&pa, &pb, sigma, &signs, tol).is_some()))
}

/// Number of distinct members of the set, identifying members whose
/// profiles coincide.
pub fn right_equivalence_classes<T: Real>(set: &IsomerSet<T>, tol: T) -> Result<usize, IsomerError> {
    let m = set.members();
    let mut rep: Vec<usize> = Vec::new();
    for i in 0..4 {
        let mut fresh = true;
        for &r in &rep {
            if same_profiles(m[r], m[i], tol)? {
                fresh = false;
                break;
            }
        }
        if fresh {
            rep.push(i);
        }
    }
    Ok(rep.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveSymmetryKind {
    None,
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricSymmetry {
    None,
    Symmetry,
    EffectiveSymmetry,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymmetryPredicates {
    pub planar: bool,
    pub curve_symmetry: CurveSymmetryKind,
    pub metric_symmetry: MetricSymmetry,
}

impl SymmetryPredicates {
    pub fn all() -> Vec<SymmetryPredicates> {
        let mut out = Vec::new();
        for planar in [false, true] {
            for curve_symmetry in [CurveSymmetryKind::None, CurveSymmetryKind::Positive, CurveSymmetryKind::Negative] {
                for metric_symmetry in [MetricSymmetry::None, MetricSymmetry::Symmetry, MetricSymmetry::EffectiveSymmetry] {
                    out.push(SymmetryPredicates {
                        planar,
                        curve_symmetry,
                        metric_symmetry,
                    });
                }
            }
        }
        out
    }
}

/// Number of congruence classes among the isomers: `(bound, exact)`.
pub fn congruence_count(p: &SymmetryPredicates) -> (u8, bool) {
    let curve = p.curve_symmetry != CurveSymmetryKind::None;
    let metric = p.metric_symmetry != MetricSymmetry::None;
    if !curve && !metric && !p.planar {
        (4, true)
    } else if (p.planar && (curve || metric)) || (p.curve_symmetry == CurveSymmetryKind::Positive && metric) {
        (1, true)
    } else {
        (2, false)
    }
}

/// Which determinant sign of a curve symmetry counts as "positive".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConvention {
    ProperIsPositive,
    ImproperIsPositive,
}

impl SignConvention {
    pub fn label<T: Real>(self, s: &CurveSymmetry<T>) -> CurveSymmetryKind {
        match (self, s.det_sign > 0) {
            (SignConvention::ProperIsPositive, true) | (SignConvention::ImproperIsPositive, false) => CurveSymmetryKind::Positive,
            _ => CurveSymmetryKind::Negative,
        }
    }
}

/// Heuristic metric symmetry: `κ_s` even about some station, up to sign.
pub fn metric_symmetry_heuristic<T: Real>(nf: &EdgeNormalForm<T>, tol: T) -> Result<MetricSymmetry, IsomerError> {
    let p = Profile::sample(nf.domain(), STATIONS, |u| -> Result<Vec<T>, IsomerError> {
        Ok(vec![nf.edge_invariants(u)?.kappa_s])
    })?;
    let hit = [T::one(), -T::one()]
        .into_iter()
        .any(|s| match_profiles(&p, &p, -T::one(), &[s], tol).is_some());
    Ok(if hit { MetricSymmetry::Symmetry } else { MetricSymmetry::None })
}

/// Predicates detected from the crease and `κ_s`.
pub fn detect_predicates<T: Real>(nf: &EdgeNormalForm<T>, convention: SignConvention, tol: T) -> Result<SymmetryPredicates, IsomerError> {
    Ok(SymmetryPredicates {
        planar: nf.crease.curve_plane(tol).is_some(),
        curve_symmetry: nf
            .crease
            .curve_symmetry(tol)
            .map_or(CurveSymmetryKind::None, |s| convention.label(&s)),
        metric_symmetry: metric_symmetry_heuristic(nf, (tol * T::lit(100.0)).max(T::lit(1e-6)))?,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ThetaProfile {
    pub member: String,
    pub faithful: bool,
    pub stations: Vec<f64>,
    pub theta: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IsomerReport {
    pub admissibility: Admissibility,
    pub profiles: Vec<ThetaProfile>,
    pub right_equivalence_classes: usize,
    pub predicates: SymmetryPredicates,
    pub congruence_bound: u8,
    pub congruence_exact: bool,
}

pub fn isomer_report<T: Real>(
    set: &IsomerSet<T>,
    predicates: SymmetryPredicates,
    stations: usize,
    tol: T,
) -> Result<IsomerReport, IsomerError> {
    let mut profiles = Vec::new();
    for (k, m) in set.members().iter().enumerate() {
        let us: Vec<T> = m.stations(stations);
        let mut theta = Vec::with_capacity(us.len());
        for &u in &us {
            theta.push(m.theta_at(u)?.to_f64_lossy());
        }
        profiles.push(ThetaProfile {
            member: MEMBER_NAMES[k].to_string(),
            faithful: set.faithful[k],
            stations: us.iter().map(|u| u.to_f64_lossy()).collect(),
            theta,
        });
    }
    let (bound, exact) = congruence_count(&predicates);
    Ok(IsomerReport {
        admissibility: admissibility(&set.base, stations)?,
        profiles,
        right_equivalence_classes: right_equivalence_classes(set, tol)?,
        predicates,
        congruence_bound: bound,
        congruence_exact: exact,
    })
}

/// Whether the station interval is symmetric about 0.
pub fn is_symmetric<T: Real>(d: Interval<T>) -> bool {
    (d.lo + d.hi).abs() <= T::lit(1e-12) * (T::one() + d.len())
}
