//! Recovering domain correspondences between frontals with equal images:
//! Legendrian lifts, image inclusion, the connecting map `ψ = L₂⁻¹ ∘ L₁`,
//! sign matching of normal forms, and a pointwise properness probe.

mod lift;
mod proper;

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::exprlang::ExprError;
use crate::germ::GermError;
use crate::normalform::{EdgeNormalForm, NormalFormError};
use crate::numkit::{least_squares, Interval, LsqOptions, NumError};
use crate::scalar::Real;

pub use lift::{box_grid, legendrian_lift, shrink, Frontal, LiftSample, Moved, PlaneCurve, Restricted};
pub use proper::{properness_probe, ProbeOptions, PropernessReport, Verdict};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatchError {
    #[error("no continuous unit normal at {at:?}")]
    NotAFrontal { at: Vec<f64> },
    #[error("map must be 1 -> 2 or 2 -> 3, got {arity} -> {dim}")]
    Shape { arity: usize, dim: usize },
    #[error("maps have incompatible shapes")]
    Incompatible,
    #[error("image of the first map is not contained in the second (distance {distance})")]
    InclusionFailure { distance: f64 },
    #[error("Legendrian lift of the second map is not injective: {a:?} and {b:?} share a lift")]
    LiftNotInjective { a: Vec<f64>, b: Vec<f64> },
    #[error("connecting map residuals too large: image {image}, normal {normal}")]
    ResidualTooLarge { image: f64, normal: f64 },
    #[error("crease images differ (distance {distance})")]
    CreaseMismatch { distance: f64 },
    #[error("neither sign e = ±1 matches the sections (residuals {plus}, {minus})")]
    NoSignFits { plus: f64, minus: f64 },
    #[error(transparent)]
    Germ(#[from] GermError),
    #[error(transparent)]
    NormalForm(#[from] NormalFormError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Num(#[from] NumError),
}

fn dist2<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (x, y)| s + (*x - *y) * (*x - *y))
}

fn clamp_box<T: Real>(dom: &[Interval<T>], x: &mut [T]) {
    for (xi, d) in x.iter_mut().zip(dom) {
        *xi = d.clamp(*xi);
    }
}

fn lsq_opts<T: Real>() -> LsqOptions<T> {
    LsqOptions {
        max_iter: 80,
        residual_tol: T::lit(1e-15),
        step_tol: T::epsilon() * T::lit(4.0),
    }
}

fn to_num(e: MatchError) -> NumError {
    NumError::Domain(e.to_string())
}

/// Table seeds polished per unseeded solve.
const SEEDS: usize = 6;
/// Image-only distances cannot tell the sheets of a fold apart, so
/// closest-point queries try more seeds.
const IMAGE_SEEDS: usize = 16;

/// Samples per axis used for queries and for the seed table.
fn resolution(arity: usize) -> (usize, usize) {
    if arity == 1 {
        (401, 4097)
    } else {
        (25, 81)
    }
}

/// Indices of the `k` rows with smallest `key`, nearest first.
fn nearest<R>(rows: &[R], k: usize, key: impl Fn(&R) -> f64) -> Vec<usize> {
    let mut near: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
    for (i, row) in rows.iter().enumerate() {
        let d = key(row);
        if near.len() < k || d < near[near.len() - 1].0 {
            let at = near.partition_point(|(x, _)| *x <= d);
            near.insert(at, (d, i));
            near.truncate(k);
        }
    }
    near.into_iter().map(|(_, i)| i).collect()
}

/// Closest point of `f2` over `dom` to `p`, polished from the nearest
/// entries of a sample table.
fn closest_point<T: Real>(
    f2: &dyn Frontal<T>,
    dom: &[Interval<T>],
    table: &[(Vec<T>, Vec<T>)],
    p: &[T],
) -> Result<(Vec<T>, T), MatchError> {
    let seeds = nearest(table, IMAGE_SEEDS, |r| dist2(&r.1, p).to_f64_lossy());
    let mut best: Option<(Vec<T>, T)> = None;
    for i in seeds {
        let seed = &table[i];
        let r = least_squares(
            |x| {
                let q = f2.point(x).map_err(to_num)?;
                Ok(q.iter().zip(p).map(|(a, b)| *a - *b).collect())
            },
            &seed.0,
            |x| clamp_box(dom, x),
            lsq_opts(),
        )?;
        let d = dist2(&seed.1, p).sqrt();
        let cand = if r.residual <= d { (r.x, r.residual) } else { (seed.0.clone(), d) };
        if best.as_ref().is_none_or(|b| cand.1 < b.1) {
            best = Some(cand);
        }
        if best.as_ref().is_some_and(|b| b.1 < T::lit(1e-13)) {
            break;
        }
    }
    best.ok_or(MatchError::Incompatible)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubsetResult<T> {
    pub subset: bool,
    pub distance: T,
}

/// Whether `f1(V1) ⊂ f2(U2)` to within `tol`, with the largest one-sided
/// distance found.
pub fn image_subset<T: Real>(
    f1: &dyn Frontal<T>,
    v1: &[Interval<T>],
    f2: &dyn Frontal<T>,
    u2: &[Interval<T>],
    tol: T,
) -> Result<SubsetResult<T>, MatchError> {
    if f1.dim() != f2.dim() {
        return Err(MatchError::Incompatible);
    }
    let (nq, ns) = resolution(f2.arity());
    let table: Vec<(Vec<T>, Vec<T>)> = box_grid(u2, ns)
        .into_par_iter()
        .filter_map(|x| f2.point(&x).ok().map(|p| (x, p)))
        .collect();
    let queries = box_grid(v1, resolution(f1.arity()).0.min(nq.max(25)));
    let dists: Vec<T> = queries
        .par_iter()
        .map(|q| {
            let p = f1.point(q)?;
            Ok(closest_point(f2, u2, &table, &p)?.1)
        })
        .collect::<Result<_, MatchError>>()?;
    let distance = dists.into_iter().fold(T::zero(), T::max);
    Ok(SubsetResult {
        subset: distance < tol,
        distance,
    })
}

/// Solves `L₁(q) = (f₂(x), e ν₂(x))` for `x`.
pub struct Connector<'a, T: Real> {
    pub f1: &'a dyn Frontal<T>,
    pub f2: &'a dyn Frontal<T>,
    pub u2: Vec<Interval<T>>,
    table: Vec<(Vec<T>, Vec<T>, Vec<T>)>,
    step: T,
}

/// One solved correspondence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Correspondence<T> {
    pub x: Vec<T>,
    pub psi: Vec<T>,
    pub image_residual: T,
    pub normal_residual: T,
}

impl<'a, T: Real> Connector<'a, T> {
    pub fn new(f1: &'a dyn Frontal<T>, f2: &'a dyn Frontal<T>, u2: Vec<Interval<T>>) -> Result<Self, MatchError> {
        if f1.dim() != f2.dim() || f1.arity() != f2.arity() {
            return Err(MatchError::Incompatible);
        }
        let ns = resolution(f2.arity()).1;
        let table: Vec<(Vec<T>, Vec<T>, Vec<T>)> = box_grid(&u2, ns)
            .into_par_iter()
            .filter_map(|x| {
                let p = f2.point(&x).ok()?;
                let n = f2.normal(&x).ok()?;
                Some((x, p, n))
            })
            .collect();
        let step = u2.iter().fold(T::zero(), |m, d| m.max(d.len())) / T::lit((ns - 1) as f64);
        Ok(Connector { f1, f2, u2, table, step })
    }

    fn lift_dist2(&self, p: &[T], n: &[T], e: T, row: &(Vec<T>, Vec<T>, Vec<T>)) -> T {
        let dn = n.iter().zip(&row.2).fold(T::zero(), |s, (a, b)| s + (*a - e * *b) * (*a - e * *b));
        dist2(p, &row.1) + dn
    }

    /// Pairs of seed samples with (nearly) equal lifts but distant
    /// preimages.
    pub fn check_injective(&self) -> Result<(), MatchError> {
        let eps = T::lit(1e-10);
        let far = self.step * T::lit(4.0);
        let hit = self.table.par_iter().enumerate().find_map_any(|(i, a)| {
            self.table[i + 1..].iter().find_map(|b| {
                let d = dist2(&a.1, &b.1) + dist2(&a.2, &b.2);
                (d < eps * eps && dist2(&a.0, &b.0).sqrt() > far).then(|| (a.0.clone(), b.0.clone()))
            })
        });
        match hit {
            Some((a, b)) => Err(MatchError::LiftNotInjective {
                a: a.iter().map(|x| x.to_f64_lossy()).collect(),
                b: b.iter().map(|x| x.to_f64_lossy()).collect(),
            }),
            None => Ok(()),
        }
    }

    /// `ψ(q)` for sign `e`. Without a seed, polishes from the few nearest
    /// lifts in the table and keeps the best.
    pub fn solve(&self, q: &[T], e: T, seed: Option<&[T]>) -> Result<Correspondence<T>, MatchError> {
        let p = self.f1.point(q)?;
        let n = self.f1.normal(q)?;
        let starts: Vec<Vec<T>> = match seed {
            Some(s) => vec![s.to_vec()],
            None => {
                let near = nearest(&self.table, SEEDS, |row| self.lift_dist2(&p, &n, e, row).to_f64_lossy());
                if near.is_empty() {
                    return Err(MatchError::Incompatible);
                }
                near.into_iter().map(|i| self.table[i].0.clone()).collect()
            }
        };
        let mut best: Option<Correspondence<T>> = None;
        for start in starts {
            let c = self.polish(q, &p, &n, e, &start)?;
            let score = c.image_residual.max(c.normal_residual);
            if best.as_ref().is_none_or(|b| score < b.image_residual.max(b.normal_residual)) {
                best = Some(c);
            }
            if score < T::lit(1e-13) {
                break;
            }
        }
        best.ok_or(MatchError::Incompatible)
    }

    fn polish(&self, q: &[T], p: &[T], n: &[T], e: T, start: &[T]) -> Result<Correspondence<T>, MatchError> {
        let r = least_squares(
            |x| {
                let a = self.f2.point(x).map_err(to_num)?;
                let b = self.f2.normal(x).map_err(to_num)?;
                Ok(p.iter()
                    .zip(&a)
                    .map(|(s, t)| *s - *t)
                    .chain(n.iter().zip(&b).map(|(s, t)| *s - e * *t))
                    .collect())
            },
            start,
            |x| clamp_box(&self.u2, x),
            lsq_opts(),
        )?;
        let a = self.f2.point(&r.x)?;
        let b = self.f2.normal(&r.x)?;
        Ok(Correspondence {
            x: q.to_vec(),
            image_residual: dist2(p, &a).sqrt(),
            normal_residual: n.iter().zip(&b).fold(T::zero(), |s, (x, y)| s + (*x - e * *y) * (*x - e * *y)).sqrt(),
            psi: r.x,
        })
    }

    /// Spacing of the seed table.
    pub fn step(&self) -> T {
        self.step
    }
}

/// Sampled connecting map with `f₁ = f₂ ∘ ψ` and `ν₁ = e ν₂ ∘ ψ`.
#[derive(Debug, Clone, Serialize)]
pub struct ConnectingMap<T> {
    pub samples: Vec<Correspondence<T>>,
    pub sign: i8,
    pub image_residual: T,
    pub normal_residual: T,
    /// No two samples share an image under `ψ` beyond grid resolution.
    pub injective: bool,
    /// Largest difference quotient of `ψ` between neighbouring samples.
    pub max_difference_quotient: T,
}

impl<T: Real> ConnectingMap<T> {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(w);
        let k = self.samples.first().map_or(0, |s| s.x.len());
        let mut head: Vec<String> = (1..=k).map(|i| format!("x{i}")).collect();
        head.extend((1..=k).map(|i| format!("psi{i}")));
        head.push("residual".into());
        out.write_record(&head)?;
        for s in &self.samples {
            let mut row: Vec<String> = s.x.iter().chain(&s.psi).map(|v| format!("{}", v.to_f64_lossy())).collect();
            row.push(format!("{}", s.image_residual.max(s.normal_residual).to_f64_lossy()));
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// `ψ = L₂⁻¹ ∘ L₁` sampled over the whole domain of `f1`.
pub fn connecting_map<T: Real>(f1: &dyn Frontal<T>, f2: &dyn Frontal<T>, tol: T) -> Result<ConnectingMap<T>, MatchError> {
    connecting_map_on(f1, &f1.domain(), f2, &f2.domain(), tol)
}

/// [`connecting_map`] for `f1` on `v1` into `f2` on `u2`.
pub fn connecting_map_on<T: Real>(
    f1: &dyn Frontal<T>,
    v1: &[Interval<T>],
    f2: &dyn Frontal<T>,
    u2: &[Interval<T>],
    tol: T,
) -> Result<ConnectingMap<T>, MatchError> {
    let con = Connector::new(f1, f2, u2.to_vec())?;
    con.check_injective()?;
    let n = resolution(f1.arity()).0;
    let queries = box_grid(v1, n);
    let mut best: Option<(T, i8, Vec<Correspondence<T>>)> = None;
    for e in [1i8, -1] {
        let es = T::lit(e as f64);
        let sols: Vec<Correspondence<T>> = queries
            .par_iter()
            .map(|q| con.solve(q, es, None))
            .collect::<Result<_, MatchError>>()?;
        let worst = sols
            .iter()
            .fold(T::zero(), |m, s| m.max(s.image_residual).max(s.normal_residual));
        if best.as_ref().is_none_or(|b| worst < b.0) {
            best = Some((worst, e, sols));
        }
    }
    let (_, sign, samples) = best.ok_or(MatchError::Incompatible)?;
    let image_residual = samples.iter().fold(T::zero(), |m, s| m.max(s.image_residual));
    let normal_residual = samples.iter().fold(T::zero(), |m, s| m.max(s.normal_residual));
    if image_residual > tol {
        let sub = image_subset(f1, v1, f2, u2, tol)?;
        if !sub.subset {
            return Err(MatchError::InclusionFailure {
                distance: sub.distance.to_f64_lossy(),
            });
        }
    }
    if image_residual > tol || normal_residual > tol {
        return Err(MatchError::ResidualTooLarge {
            image: image_residual.to_f64_lossy(),
            normal: normal_residual.to_f64_lossy(),
        });
    }
    let res = T::lit(1e-9);
    let injective = (0..samples.len()).into_par_iter().all(|i| {
        samples[i + 1..]
            .iter()
            .all(|b| dist2(&samples[i].psi, &b.psi).sqrt() > res || dist2(&samples[i].x, &b.x).sqrt() <= res)
    });
    let stride = if f1.arity() == 1 { 1 } else { n };
    let mut dq = T::zero();
    for i in 0..samples.len() {
        for j in [i + 1, i + stride] {
            if j < samples.len() && (stride == 1 || j != i + 1 || (i + 1) % n != 0) {
                let dx = dist2(&samples[i].x, &samples[j].x).sqrt();
                if dx > T::zero() {
                    dq = dq.max(dist2(&samples[i].psi, &samples[j].psi).sqrt() / dx);
                }
            }
        }
    }
    Ok(ConnectingMap {
        samples,
        sign,
        image_residual,
        normal_residual,
        injective,
        max_difference_quotient: dq,
    })
}

/// How two normal forms along the same crease correspond:
/// `f₁(s, t) = f₂(±s + c, e t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalFormMatch<T> {
    pub u_flip: bool,
    pub shift: T,
    pub sign: i8,
    pub residual: T,
}

pub fn match_normal_forms<T: Real>(
    nf1: &EdgeNormalForm<T>,
    nf2: &EdgeNormalForm<T>,
    tol: T,
) -> Result<NormalFormMatch<T>, MatchError> {
    let (c1, c2) = (&nf1.crease, &nf2.crease);
    let d1 = nf1.domain();
    let s0 = d1.mid();
    let p0 = c1.point(s0).map_err(NormalFormError::from)?;
    // nearest crease point of the second form
    let grid = nf2.domain().linspace(4097);
    let mut s_best = grid[0];
    let mut d_best = T::infinity();
    for &s in &grid {
        let d = (c2.point(s).map_err(NormalFormError::from)? - p0).norm();
        if d < d_best {
            d_best = d;
            s_best = s;
        }
    }
    let h = nf2.domain().len() / T::lit(4096.0);
    let (mut lo, mut hi) = (s_best - h, s_best + h);
    let g = T::lit(0.618_033_988_749_894_8);
    let f = |s: T| c2.point(nf2.domain().clamp(s)).map(|q| (q - p0).norm()).unwrap_or(T::infinity());
    for _ in 0..100 {
        let (x1, x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
        if f(x1) < f(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    let s2 = nf2.domain().clamp((lo + hi) * T::lit(0.5));
    let e1 = c1.derivatives(s0, 1).map_err(NormalFormError::from)?[1];
    let e2 = c2.derivatives(s2, 1).map_err(NormalFormError::from)?[1];
    let sigma = if e1.dot(&e2) >= T::zero() { T::one() } else { -T::one() };
    let shift = s2 - sigma * s0;
    let stations: Vec<T> = d1
        .linspace(33)
        .into_iter()
        .filter(|&s| nf2.domain().contains(sigma * s + shift))
        .collect();
    let mut crease_err = T::zero();
    for &s in &stations {
        let a = c1.point(s).map_err(NormalFormError::from)?;
        let b = c2.point(sigma * s + shift).map_err(NormalFormError::from)?;
        crease_err = crease_err.max((a - b).norm());
    }
    if stations.len() < 2 || crease_err > tol {
        return Err(MatchError::CreaseMismatch {
            distance: crease_err.to_f64_lossy(),
        });
    }
    let w = nf1.halfwidth.min(nf2.halfwidth);
    let ts = Interval::new(-w, w).linspace(9);
    let mut resid = [T::zero(); 2];
    for (k, e) in [T::one(), -T::one()].into_iter().enumerate() {
        for &s in &stations {
            for &t in &ts {
                let a = nf1.point(s, t)?;
                let b = nf2.point(sigma * s + shift, e * t)?;
                resid[k] = resid[k].max((a - b).norm());
            }
        }
    }
    let k = if resid[0] <= resid[1] { 0 } else { 1 };
    if resid[k] > tol {
        return Err(MatchError::NoSignFits {
            plus: resid[0].to_f64_lossy(),
            minus: resid[1].to_f64_lossy(),
        });
    }
    Ok(NormalFormMatch {
        u_flip: sigma < T::zero(),
        shift,
        sign: if k == 0 { 1 } else { -1 },
        residual: resid[k],
    })
}

#[cfg(test)]
mod tests;
