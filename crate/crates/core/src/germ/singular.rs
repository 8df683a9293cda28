use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{null_vector, GermError, SurfaceGerm};
use crate::scalar::{Real, V3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SingularType {
    #[serde(rename = "I")]
    I,
    #[serde(rename = "II")]
    II,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularSample<T> {
    pub point: [T; 2],
    /// `∇λ` at the point.
    pub grad: [T; 2],
    pub nondegenerate: bool,
    pub kind: SingularType,
    pub null_dir: [T; 2],
    /// Unit tangent of the singular curve in the domain.
    pub tangent: [T; 2],
}

/// Traced zero set of `λ`, one polyline per connected branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularCurve<T> {
    pub branches: Vec<Vec<SingularSample<T>>>,
}

impl<T: Real> SingularCurve<T> {
    pub fn is_empty(&self) -> bool {
        self.branches.iter().all(|b| b.is_empty())
    }

    pub fn samples(&self) -> impl Iterator<Item = &SingularSample<T>> {
        self.branches.iter().flatten()
    }

    pub fn len(&self) -> usize {
        self.branches.iter().map(|b| b.len()).sum()
    }
}

/// Sine of the angle below which the null direction counts as tangent.
const TYPE_II_SINE: f64 = 1e-6;
const GRID: usize = 256;

fn norm2<T: Real>(a: [T; 2]) -> T {
    (a[0] * a[0] + a[1] * a[1]).sqrt()
}

impl<T: Real> SurfaceGerm<T> {
    /// Classifies a point already known to be singular.
    pub fn singular_sample(&self, u: T, v: T, tol: T) -> Result<SingularSample<T>, GermError> {
        let grad = self.area_density_grad(u, v)?;
        let gn = norm2(grad);
        let (e, f, g) = self.first_fundamental_form(u, v)?;
        let eta = null_vector(e, f, g);
        let tangent = if gn > T::zero() {
            [-grad[1] / gn, grad[0] / gn]
        } else {
            eta
        };
        let sine = (eta[0] * tangent[1] - eta[1] * tangent[0]).abs();
        Ok(SingularSample {
            point: [u, v],
            grad,
            nondegenerate: gn > tol,
            kind: if sine < T::lit(TYPE_II_SINE) {
                SingularType::II
            } else {
                SingularType::I
            },
            null_dir: eta,
            tangent,
        })
    }

    /// Newton projection onto `λ = 0` along `∇λ`.
    pub fn polish_singular(&self, mut p: [T; 2]) -> Result<[T; 2], GermError> {
        for _ in 0..40 {
            let l = self.area_density(p[0], p[1])?;
            if l.abs() < T::lit(1e-14) {
                break;
            }
            let g = self.area_density_grad(p[0], p[1])?;
            let gg = g[0] * g[0] + g[1] * g[1];
            if !(gg > T::lit(1e-24)) {
                break;
            }
            let step = [l * g[0] / gg, l * g[1] / gg];
            p = [p[0] - step[0], p[1] - step[1]];
            if norm2(step) < T::epsilon() * T::lit(4.0) {
                break;
            }
        }
        Ok(p)
    }

    /// Zero set of `λ` on the domain: sign changes on a 256² cell grid,
    /// chained into branches, Newton-polished.
    pub fn singular_curve(&self, tol: T) -> Result<SingularCurve<T>, GermError> {
        let d = self.domain;
        let us = d.u.linspace(GRID + 1);
        let vs = d.v.linspace(GRID + 1);
        let nv = GRID + 1;
        let lam: Vec<T> = us
            .par_iter()
            .map(|&u| vs.iter().map(|&v| self.area_density(u, v)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .flatten()
            .collect();
        let pos = |i: usize, j: usize| lam[i * nv + j] >= T::zero();
        let node = |i: usize, j: usize| [us[i], vs[j]];
        let lerp = |a: (usize, usize), b: (usize, usize)| {
            let (la, lb) = (lam[a.0 * nv + a.1], lam[b.0 * nv + b.1]);
            let t = la / (la - lb);
            let (pa, pb) = (node(a.0, a.1), node(b.0, b.1));
            [pa[0] + (pb[0] - pa[0]) * t, pa[1] + (pb[1] - pa[1]) * t]
        };
        // edge ids: 2*(i*nv+j) horizontal (i,j)-(i+1,j); +1 vertical (i,j)-(i,j+1)
        let mut points: BTreeMap<usize, [T; 2]> = BTreeMap::new();
        let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..GRID {
            for j in 0..GRID {
                let mut hits = Vec::with_capacity(4);
                let edges = [
                    (2 * (i * nv + j), (i, j), (i + 1, j)),
                    (2 * ((i + 1) * nv + j) + 1, (i + 1, j), (i + 1, j + 1)),
                    (2 * (i * nv + j + 1), (i + 1, j + 1), (i, j + 1)),
                    (2 * (i * nv + j) + 1, (i, j + 1), (i, j)),
                ];
                for &(id, a, b) in &edges {
                    if pos(a.0, a.1) != pos(b.0, b.1) {
                        points.entry(id).or_insert_with(|| lerp(a, b));
                        hits.push(id);
                    }
                }
                let mut link = |a: usize, b: usize| {
                    adj.entry(a).or_default().push(b);
                    adj.entry(b).or_default().push(a);
                };
                match hits.len() {
                    2 => link(hits[0], hits[1]),
                    4 => {
                        let centre = lam[i * nv + j] + lam[(i + 1) * nv + j] + lam[i * nv + j + 1] + lam[(i + 1) * nv + j + 1];
                        if (centre >= T::zero()) == pos(i, j) {
                            link(hits[0], hits[1]);
                            link(hits[2], hits[3]);
                        } else {
                            link(hits[0], hits[3]);
                            link(hits[1], hits[2]);
                        }
                    }
                    _ => {}
                }
            }
        }
        let mut chains: Vec<Vec<usize>> = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        let starts: Vec<usize> = adj
            .iter()
            .filter(|(_, n)| n.len() == 1)
            .map(|(k, _)| *k)
            .chain(adj.keys().copied())
            .collect();
        for s in starts {
            if seen.contains(&s) {
                continue;
            }
            let mut chain = vec![s];
            seen.insert(s);
            let mut cur = s;
            loop {
                let next = adj[&cur].iter().copied().find(|n| !seen.contains(n));
                match next {
                    Some(n) => {
                        seen.insert(n);
                        chain.push(n);
                        cur = n;
                    }
                    None => break,
                }
            }
            chains.push(chain);
        }
        let mut branches = Vec::with_capacity(chains.len());
        for chain in chains {
            let raw: Vec<[T; 2]> = chain.iter().map(|id| points[id]).collect();
            let polished: Vec<[T; 2]> = raw
                .par_iter()
                .map(|&p| self.polish_singular(p))
                .collect::<Result<Vec<_>, _>>()?;
            let mut pts: Vec<[T; 2]> = Vec::with_capacity(polished.len());
            for p in polished {
                if pts.last().map_or(true, |q| norm2([p[0] - q[0], p[1] - q[1]]) > T::lit(1e-12)) {
                    pts.push(p);
                }
            }
            if pts.len() > 1 {
                let (a, b) = (pts[0], pts[pts.len() - 1]);
                if (b[0], b[1]).partial_cmp(&(a[0], a[1])) == Some(std::cmp::Ordering::Less) {
                    pts.reverse();
                }
            }
            branches.push(pts);
        }
        // make sure a singular base point is represented exactly
        let base = self.base;
        if self.area_density(base[0], base[1])?.abs() <= T::lit(1e-12) {
            insert_point(&mut branches, base);
        }
        let mut out = Vec::with_capacity(branches.len());
        for pts in branches {
            let mut samples = pts
                .par_iter()
                .map(|p| self.singular_sample(p[0], p[1], tol))
                .collect::<Result<Vec<_>, _>>()?;
            orient_tangents(&mut samples);
            out.push(samples);
        }
        Ok(SingularCurve { branches: out })
    }

    /// Limiting normal curvature `γ̂''·ν / |γ̂'|²` at a type I singular point,
    /// using the singular curve written locally as a graph over its tangent.
    pub fn limiting_normal_curvature(&self, u: T, v: T) -> Result<T, GermError> {
        let p = self.polish_singular([u, v])?;
        let s = self.singular_sample(p[0], p[1], T::lit(1e-12))?;
        let (uf, vf) = (u.to_f64_lossy(), v.to_f64_lossy());
        if s.kind == SingularType::II {
            return Err(GermError::TypeII { u: uf, v: vf });
        }
        let gn = norm2(s.grad);
        if !(gn > T::zero()) {
            return Err(GermError::TypeII { u: uf, v: vf });
        }
        let nrm = [s.grad[0] / gn, s.grad[1] / gn];
        let tan = s.tangent;
        let on_curve = |t: T| -> Result<V3<T>, GermError> {
            let mut g = T::zero();
            for _ in 0..40 {
                let x = [p[0] + tan[0] * t + nrm[0] * g, p[1] + tan[1] * t + nrm[1] * g];
                let l = self.area_density(x[0], x[1])?;
                let gr = self.area_density_grad(x[0], x[1])?;
                let dl = gr[0] * nrm[0] + gr[1] * nrm[1];
                if !(dl.abs() > T::zero()) {
                    break;
                }
                let step = l / dl;
                g = g - step;
                if step.abs() <= T::epsilon() * T::lit(2.0) * (T::one() + g.abs()) {
                    break;
                }
            }
            self.point(p[0] + tan[0] * t + nrm[0] * g, p[1] + tan[1] * t + nrm[1] * g)
        };
        let h = self.domain.scale() * T::lit(2e-3);
        let f = [
            on_curve(-(h + h))?,
            on_curve(-h)?,
            on_curve(T::zero())?,
            on_curve(h)?,
            on_curve(h + h)?,
        ];
        let twelve = T::lit(12.0);
        let d1 = (f[0] - f[1].scale(T::lit(8.0)) + f[3].scale(T::lit(8.0)) - f[4]).scale(T::one() / (twelve * h));
        let d2 = (f[1].scale(T::lit(16.0)) + f[3].scale(T::lit(16.0)) - f[0] - f[4] - f[2].scale(T::lit(30.0)))
            .scale(T::one() / (twelve * h * h));
        let sp2 = d1.dot(&d1);
        if !(sp2 > T::lit(1e-20)) {
            return Err(GermError::StationaryImage { u: uf, v: vf });
        }
        let nu = self.normal(p[0], p[1])?;
        Ok(d2.dot(&nu) / sp2)
    }
}

fn insert_point<T: Real>(branches: &mut Vec<Vec<[T; 2]>>, p: [T; 2]) {
    let dist = |q: &[T; 2]| norm2([q[0] - p[0], q[1] - p[1]]);
    let mut best: Option<(usize, usize, T)> = None;
    for (bi, b) in branches.iter().enumerate() {
        for (k, q) in b.iter().enumerate() {
            let d = dist(q);
            if best.map_or(true, |(_, _, bd)| d < bd) {
                best = Some((bi, k, d));
            }
        }
    }
    let Some((bi, k, d)) = best else {
        branches.push(vec![p]);
        return;
    };
    if d <= T::lit(1e-12) {
        branches[bi][k] = p;
        return;
    }
    let b = &mut branches[bi];
    // insert on the side of the nearest point facing p
    let before = k > 0 && dist(&b[k - 1]) < b.get(k + 1).map_or(T::infinity(), |q| dist(q));
    if before {
        b.insert(k, p);
    } else {
        b.insert(k + 1, p);
    }
}

fn orient_tangents<T: Real>(samples: &mut [SingularSample<T>]) {
    let n = samples.len();
    if n < 2 {
        return;
    }
    for k in 0..n {
        let (a, b) = if k + 1 < n { (k, k + 1) } else { (k - 1, k) };
        let d = [
            samples[b].point[0] - samples[a].point[0],
            samples[b].point[1] - samples[a].point[1],
        ];
        let t = samples[k].tangent;
        if t[0] * d[0] + t[1] * d[1] < T::zero() {
            samples[k].tangent = [-t[0], -t[1]];
        }
    }
}
