//! Symmetries of singular surface germs.
//!
//! At a cuspidal edge, swallowtail or cuspidal cross cap the only possible
//! non-trivial isometric self-symmetries fixing `f(p)` are the reflections in
//! the three frame planes and the half-turn about the conormal line. This
//! module tests those four candidates for image invariance, recovers the
//! domain involution `ψ` with `f ∘ ψ = T ∘ f`, checks the structural
//! constraints that must hold between singularity type and symmetry type,
//! and locates self-intersections.

mod locus;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::exprlang::{ExprError, MapDef};
use crate::geom::{classify_isometry, GeomError, GermFrame, IsoLabel, Isometry};
use crate::germ::{ms_edge, GermError, GermKind, Rect, SurfaceGerm};
use crate::matching::{image_subset, ConnectingMap, Connector, MatchError, Moved};
use crate::numkit::Interval;
use crate::scalar::{Real, V3};

pub use locus::{self_intersections, verify_c2, C2Report, Check, SelfIntersectionLocus};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymmetryError {
    #[error("symmetry analysis needs a cuspidal edge, swallowtail or cuspidal cross cap, got {0:?}")]
    Unsupported(GermKind),
    #[error("b3(0, 0) must be non-zero")]
    DegenerateCubic,
    #[error(transparent)]
    Germ(#[from] GermError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Match(#[from] MatchError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Shrink factor of the neighbourhood `V` tested for `T ∘ f(V) ⊂ f(U)`.
pub const NEIGHBOURHOOD_FACTOR: f64 = 0.5;
/// Tolerance on `‖T² − I‖` and on `|T f(p) − f(p)|`.
pub const ISOMETRY_TOL: f64 = 1e-10;
/// `|κ_ν(p)|` above this counts as non-zero.
pub const KAPPA_NU_ZERO: f64 = 1e-6;

pub(crate) fn boxed<T: Real>(r: &Rect<T>) -> Vec<Interval<T>> {
    vec![r.u, r.v]
}

fn supported(kind: GermKind) -> bool {
    matches!(kind, GermKind::CuspidalEdge | GermKind::Swallowtail | GermKind::CuspidalCrossCap)
}

/// How `ψ` acts near `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Orientation {
    pub jacobian_det: f64,
    pub preserves_orientation: bool,
    /// `None` when the singular curve has no well-defined tangent at `p`.
    pub reverses_singular_curve: Option<bool>,
}

/// Sampled `ψ` with `f ∘ ψ = T ∘ f`.
#[derive(Debug, Clone, Serialize)]
pub struct Involution<T> {
    pub map: ConnectingMap<T>,
    /// `sup |ψ∘ψ − id|` over the samples.
    pub involution_defect: T,
    /// `sup |f∘ψ − T∘f|` over the samples.
    pub equivariance_defect: T,
    pub orientation: Orientation,
}

/// One detected symmetry.
#[derive(Debug, Clone, Serialize)]
#[serde(bound = "T: Real")]
pub struct SymmetryFinding<T: Real> {
    pub isometry: Isometry<T>,
    pub label: IsoLabel,
    /// Roman numeral of the case, when the isometry is one of the four.
    pub case: Option<&'static str>,
    /// Largest distance from `T ∘ f(V)` to `f(U)`.
    pub residual: T,
    pub involution_defect: T,
    pub fixes_base_image: bool,
    pub psi: Option<Involution<T>>,
    /// Why `psi` is missing.
    pub psi_error: Option<String>,
}

impl<T: Real> SymmetryFinding<T> {
    pub fn is_involution(&self) -> bool {
        self.involution_defect.to_f64_lossy() < ISOMETRY_TOL
    }
}

/// Outcome of a candidate that was tested but not accepted.
#[derive(Debug, Clone, Serialize)]
pub struct Rejected<T> {
    pub label: IsoLabel,
    pub distance: T,
}

/// Consistency checks between singularity type and findings.
#[derive(Debug, Clone, Serialize)]
pub struct Validation {
    pub rule: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
#[serde(bound = "T: Real")]
pub struct SymmetryReport<T: Real> {
    pub germ: String,
    pub kind: GermKind,
    pub point: [T; 2],
    /// Limiting normal curvature at `p` (edges and cuspidal cross caps).
    pub kappa_nu: Option<T>,
    pub findings: Vec<SymmetryFinding<T>>,
    pub rejected: Vec<Rejected<T>>,
    pub validation: Vec<Validation>,
}

impl<T: Real> SymmetryReport<T> {
    /// Roman numerals of the findings, in label order.
    pub fn cases(&self) -> Vec<&'static str> {
        self.findings.iter().filter_map(|f| f.case).collect()
    }

    pub fn valid(&self) -> bool {
        self.validation.iter().all(|v| v.passed)
    }

    pub fn finding(&self, label: IsoLabel) -> Option<&SymmetryFinding<T>> {
        self.findings.iter().find(|f| f.label == label)
    }
}

fn frame_at<T: Real>(germ: &SurfaceGerm<T>, p: [T; 2]) -> Result<GermFrame<T>, SymmetryError> {
    Ok(germ.distinguished_frame(p[0], p[1])?.frame)
}

/// Tests `T ∘ f(V) ⊂ f(U)` on the neighbourhood `V` of `p`.
fn invariance<T: Real>(germ: &SurfaceGerm<T>, p: [T; 2], t: &Isometry<T>, tol: T) -> Result<T, SymmetryError> {
    let moved = Moved { inner: germ, iso: *t };
    let v = boxed(&germ.domain().shrunk_about(p, T::lit(NEIGHBOURHOOD_FACTOR)));
    Ok(image_subset(&moved, &v, germ, &boxed(&germ.domain()), tol)?.distance)
}

fn finding<T: Real>(
    germ: &SurfaceGerm<T>,
    p: [T; 2],
    label: IsoLabel,
    t: Isometry<T>,
    residual: T,
    tol: T,
) -> Result<SymmetryFinding<T>, SymmetryError> {
    let fp = germ.point(p[0], p[1])?;
    let (psi, psi_error) = match connecting_involution(germ, p, &t, tol) {
        Ok(i) => (Some(i), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(SymmetryFinding {
        isometry: t,
        label,
        case: label.case(),
        residual,
        involution_defect: t.involution_defect(),
        fixes_base_image: (t.apply(&fp) - fp).norm().to_f64_lossy() < ISOMETRY_TOL,
        psi,
        psi_error,
    })
}

/// The frame-derived candidates that leave the image invariant near `p`.
pub fn detect_symmetries<T: Real>(germ: &SurfaceGerm<T>, p: [T; 2], tol: T) -> Result<SymmetryReport<T>, SymmetryError> {
    let kind = germ.kind();
    if !supported(kind) {
        return Err(SymmetryError::Unsupported(kind));
    }
    let frame = frame_at(germ, p)?;
    let tested: Vec<(IsoLabel, Isometry<T>, T)> = frame
        .candidates()
        .into_par_iter()
        .map(|(l, t)| Ok((l, t, invariance(germ, p, &t, tol)?)))
        .collect::<Result<_, SymmetryError>>()?;
    let mut findings = Vec::new();
    let mut rejected = Vec::new();
    for (label, t, d) in tested {
        if d < tol {
            findings.push(finding(germ, p, label, t, d, tol)?);
        } else {
            rejected.push(Rejected { label, distance: d });
        }
    }
    let kappa_nu = match kind {
        GermKind::Swallowtail => None,
        _ => Some(germ.limiting_normal_curvature(p[0], p[1])?),
    };
    let validation = validate(kind, kappa_nu, &findings, tol);
    Ok(SymmetryReport {
        germ: germ.name().to_string(),
        kind,
        point: p,
        kappa_nu,
        findings,
        rejected,
        validation,
    })
}

/// Tests a user-supplied isometry instead of the frame candidates.
pub fn test_isometry<T: Real>(
    germ: &SurfaceGerm<T>,
    p: [T; 2],
    t: &Isometry<T>,
    tol: T,
) -> Result<Option<SymmetryFinding<T>>, SymmetryError> {
    let frame = frame_at(germ, p)?;
    let label = classify_isometry(t, &frame, T::lit(1e-8))?;
    let d = invariance(germ, p, t, tol)?;
    if d >= tol {
        return Ok(None);
    }
    Ok(Some(finding(germ, p, label, *t, d, tol)?))
}

fn validate<T: Real>(kind: GermKind, kappa_nu: Option<T>, findings: &[SymmetryFinding<T>], tol: T) -> Vec<Validation> {
    let labels: Vec<IsoLabel> = findings.iter().map(|f| f.label).collect();
    let names = |ls: &[IsoLabel]| ls.iter().filter_map(|l| l.case()).collect::<Vec<_>>().join(",");
    let mut out = Vec::new();
    match kind {
        GermKind::CuspidalEdge | GermKind::CuspidalCrossCap => {
            out.push(Validation {
                rule: "c1_no_conormal_reflection",
                passed: !labels.contains(&IsoLabel::ReflPi2),
                detail: format!("found {{{}}}", names(&labels)),
            });
            let k = kappa_nu.map_or(0.0, |k| k.to_f64_lossy());
            if k.abs() > KAPPA_NU_ZERO {
                out.push(Validation {
                    rule: "c1_only_normal_plane_when_curved",
                    passed: labels.iter().all(|l| *l == IsoLabel::ReflPi1),
                    detail: format!("kappa_nu = {k:e}, found {{{}}}", names(&labels)),
                });
            }
        }
        GermKind::Swallowtail => out.push(Validation {
            rule: "c3_only_conormal_reflection",
            passed: labels.iter().all(|l| *l == IsoLabel::ReflPi2),
            detail: format!("found {{{}}}", names(&labels)),
        }),
        _ => {}
    }
    for f in findings {
        out.push(Validation {
            rule: "isometry_is_involution_fixing_base",
            passed: f.is_involution() && f.fixes_base_image,
            detail: format!("{:?}: defect {:e}", f.label, f.involution_defect.to_f64_lossy()),
        });
        let detail = match (&f.psi, &f.psi_error) {
            (Some(i), _) => format!(
                "{:?}: sup|psi∘psi - id| = {:e}, sup|f∘psi - T∘f| = {:e}",
                f.label,
                i.involution_defect.to_f64_lossy(),
                i.equivariance_defect.to_f64_lossy()
            ),
            (None, e) => format!("{:?}: {}", f.label, e.as_deref().unwrap_or("no involution")),
        };
        out.push(Validation {
            rule: "psi_is_involution",
            passed: f
                .psi
                .as_ref()
                .is_some_and(|i| i.involution_defect < tol && i.equivariance_defect < tol),
            detail,
        });
    }
    out
}

/// `ψ` with `f ∘ ψ = T ∘ f` on the neighbourhood of `p`, as the connecting
/// map from `T ∘ f` to `f`, checked to be an involution.
pub fn connecting_involution<T: Real>(
    germ: &SurfaceGerm<T>,
    p: [T; 2],
    t: &Isometry<T>,
    tol: T,
) -> Result<Involution<T>, SymmetryError> {
    let moved = Moved { inner: germ, iso: *t };
    let full = boxed(&germ.domain());
    let v = boxed(&germ.domain().shrunk_about(p, T::lit(NEIGHBOURHOOD_FACTOR)));
    let map = crate::matching::connecting_map_on(&moved, &v, germ, &full, tol)?;
    let con = Connector::new(&moved, germ, full)?;
    let e = T::lit(map.sign as f64);
    let involution_defect = map
        .samples
        .par_iter()
        .map(|s| {
            let back = con.solve(&s.psi, e, None)?;
            Ok(dist(&back.psi, &s.x))
        })
        .collect::<Result<Vec<T>, MatchError>>()?
        .into_iter()
        .fold(T::zero(), T::max);
    let orientation = orientation(germ, p, &con, e)?;
    Ok(Involution {
        equivariance_defect: map.image_residual,
        map,
        involution_defect,
        orientation,
    })
}

fn dist<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (x, y)| s + (*x - *y) * (*x - *y)).sqrt()
}

/// Central-difference Jacobian of `ψ` at `p`.
fn orientation<T: Real>(germ: &SurfaceGerm<T>, p: [T; 2], con: &Connector<'_, T>, e: T) -> Result<Orientation, SymmetryError> {
    let h = germ.domain().scale() * T::lit(1e-2);
    let mut jac = [[T::zero(); 2]; 2];
    for k in 0..2 {
        let mut a = p;
        let mut b = p;
        a[k] = a[k] + h;
        b[k] = b[k] - h;
        let pa = con.solve(&a, e, None)?.psi;
        let pb = con.solve(&b, e, None)?.psi;
        for i in 0..2 {
            jac[i][k] = (pa[i] - pb[i]) / (h + h);
        }
    }
    let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
    let tangent = germ
        .singular_sample(p[0], p[1], T::lit(1e-12))
        .ok()
        .map(|s| s.tangent)
        .filter(|t| t[0].is_finite() && t[1].is_finite() && (t[0] != T::zero() || t[1] != T::zero()));
    let reverses = tangent.map(|t| {
        let jt = [jac[0][0] * t[0] + jac[0][1] * t[1], jac[1][0] * t[0] + jac[1][1] * t[1]];
        jt[0] * t[0] + jt[1] * t[1] < T::zero()
    });
    Ok(Orientation {
        jacobian_det: det.to_f64_lossy(),
        preserves_orientation: det > T::zero(),
        reverses_singular_curve: reverses,
    })
}

/// Parity conditions on the cuspidal edge `(u, a₀ + v², b₀u² + b₂uv² + b₃v³)`.
#[derive(Debug, Clone, Serialize)]
pub struct ParityCheck {
    pub a0_even: bool,
    pub b0_even: bool,
    pub b2_odd: bool,
    pub b3_even_in_u: bool,
    /// Largest parity defect over the probe grid, per condition.
    pub defects: [f64; 4],
    pub kappa_nu: f64,
    pub kappa_nu_nonzero: bool,
    /// The normal-plane reflection found on the built germ, if any.
    pub normal_plane_symmetry: Option<SymmetryFinding<f64>>,
    pub report: SymmetryReport<f64>,
}

impl ParityCheck {
    pub fn parities_hold(&self) -> bool {
        self.a0_even && self.b0_even && self.b2_odd && self.b3_even_in_u
    }
}

/// Checks the parity conditions that make the edge symmetric under
/// `u ↦ −u`, and whether symmetry detection agrees.
pub fn ms_symmetry_check(a0: &str, b0: &str, b2: &str, b3: &str, tol: f64) -> Result<ParityCheck, SymmetryError> {
    let coef = [a0, b0, b2, b3]
        .iter()
        .map(|src| MapDef::<f64>::parse("ms", &["u", "v"], &[src], &[]))
        .collect::<Result<Vec<_>, _>>()?;
    let at = |u: f64, v: f64| -> Result<Vec<f64>, SymmetryError> {
        coef.iter()
            .map(|c| Ok(crate::numkit::Evaluable::eval(c, &[u, v]).map_err(MatchError::from)?[0]))
            .collect()
    };
    if at(0.0, 0.0)?[3].abs() <= 1e-12 {
        return Err(SymmetryError::DegenerateCubic);
    }
    let probe = Interval::new(-0.9, 0.9).linspace(13);
    let mut defects = [0.0f64; 4];
    for &u in &probe {
        for &v in &probe {
            let (p, m) = (at(u, v)?, at(-u, v)?);
            let d = [p[0] - m[0], p[1] - m[1], p[2] + m[2], p[3] - m[3]];
            for (acc, x) in defects.iter_mut().zip(d) {
                *acc = acc.max(x.abs());
            }
        }
    }
    let scale = 1e-9;
    let germ = ms_edge::<f64>(a0, b0, b2, b3)?;
    let report = detect_symmetries(&germ, [0.0, 0.0], tol)?;
    let kappa_nu = germ.limiting_normal_curvature(0.0, 0.0)?;
    Ok(ParityCheck {
        a0_even: defects[0] < scale,
        b0_even: defects[1] < scale,
        b2_odd: defects[2] < scale,
        b3_even_in_u: defects[3] < scale,
        defects,
        kappa_nu,
        kappa_nu_nonzero: kappa_nu.abs() > KAPPA_NU_ZERO,
        normal_plane_symmetry: report.finding(IsoLabel::ReflPi1).cloned(),
        report,
    })
}

/// Unit vector helper shared with the locus code.
pub(crate) fn v3<T: Real>(x: &[T]) -> V3<T> {
    V3::new(x[0], x[1], x[2])
}

#[cfg(test)]
mod tests;
