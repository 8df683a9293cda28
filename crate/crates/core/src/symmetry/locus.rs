use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use super::{boxed, v3, SymmetryError, SymmetryFinding};
use crate::germ::{GermKind, Rect, SurfaceGerm};
use crate::matching::{Connector, Frontal, MatchError, Moved};
use crate::numkit::{least_squares, LsqOptions, NumError};
use crate::scalar::{Real, V3};

/// Samples per axis of the coarse image grid.
const GRID: usize = 161;

/// Double points of a germ: pairs `q ≠ q′` with `f(q) = f(q′)`.
#[derive(Debug, Clone, Serialize)]
pub struct SelfIntersectionLocus<T> {
    /// Each pair ordered by `v`, then `u`; the list is sorted by the first point.
    pub pairs: Vec<[[T; 2]; 2]>,
    /// `f` of the first point of each pair.
    pub image: Vec<V3<T>>,
    /// Largest `|f(q) − f(q′)|`.
    pub residual: T,
    /// Spacing of the sampling grid in the domain.
    pub grid_step: T,
}

impl<T: Real> SelfIntersectionLocus<T> {
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Both points of every pair.
    pub fn preimages(&self) -> impl Iterator<Item = [T; 2]> + '_ {
        self.pairs.iter().flat_map(|p| p.iter().copied())
    }
}

fn cell_key<T: Real>(x: &V3<T>, c: T) -> [i64; 3] {
    [0, 1, 2].map(|i| (x.0[i] / c).floor().to_f64_lossy() as i64)
}

fn sep<T: Real>(a: [T; 2], b: [T; 2]) -> T {
    ((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1])).sqrt()
}

fn ordered<T: Real>(a: [T; 2], b: [T; 2]) -> [[T; 2]; 2] {
    if (a[1], a[0]) <= (b[1], b[0]) {
        [a, b]
    } else {
        [b, a]
    }
}

/// Refines a seed pair with one coordinate of the first point held fixed.
fn refine<T: Real>(germ: &SurfaceGerm<T>, region: &Rect<T>, q: [T; 2], r: [T; 2], fixed: usize) -> Option<([[T; 2]; 2], T)> {
    let free = 1 - fixed;
    let unpack = |x: &[T]| {
        let mut a = q;
        a[free] = x[0];
        (a, [x[1], x[2]])
    };
    let opts = LsqOptions {
        max_iter: 60,
        residual_tol: T::lit(1e-15),
        step_tol: T::epsilon() * T::lit(4.0),
    };
    let rep = least_squares(
        |x| {
            let (a, b) = unpack(x);
            let d = germ.point(a[0], a[1]).map_err(|e| NumError::Domain(e.to_string()))?
                - germ.point(b[0], b[1]).map_err(|e| NumError::Domain(e.to_string()))?;
            Ok(d.0.to_vec())
        },
        &[q[free], r[0], r[1]],
        |x| {
            let ivs = [region.u, region.v];
            x[0] = ivs[free].clamp(x[0]);
            x[1] = region.u.clamp(x[1]);
            x[2] = region.v.clamp(x[2]);
        },
        opts,
    )
    .ok()?;
    let (a, b) = unpack(&rep.x);
    Some((ordered(a, b), rep.residual))
}

/// Self-intersections of `germ` over `region`: image samples are hashed,
/// close images with distant preimages seed a Gauss–Newton solve of
/// `f(q) = f(q′)`.
pub fn self_intersections<T: Real>(germ: &SurfaceGerm<T>, region: &Rect<T>, tol: T) -> Result<SelfIntersectionLocus<T>, SymmetryError> {
    let pts = region.grid(GRID, GRID);
    let imgs: Vec<V3<T>> = pts
        .par_iter()
        .map(|q| germ.point(q[0], q[1]))
        .collect::<Result<_, _>>()?;
    let step = region.u.len().max(region.v.len()) / T::lit((GRID - 1) as f64);
    let mut spacing = T::zero();
    for i in 0..GRID {
        for j in 0..GRID {
            let k = i * GRID + j;
            if j + 1 < GRID {
                spacing = spacing.max((imgs[k + 1] - imgs[k]).norm());
            }
            if i + 1 < GRID {
                spacing = spacing.max((imgs[k + GRID] - imgs[k]).norm());
            }
        }
    }
    let cell = spacing * T::lit(2.0);
    let min_sep = step * T::lit(6.0);
    let mut hash: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    for (k, x) in imgs.iter().enumerate() {
        hash.entry(cell_key(x, cell)).or_default().push(k);
    }
    let candidates: Vec<(usize, usize)> = (0..pts.len())
        .into_par_iter()
        .filter_map(|i| {
            let key = cell_key(&imgs[i], cell);
            let mut best: Option<(T, usize)> = None;
            for dx in -1..=1 {
                for dy in -1..=1 {
                    for dz in -1..=1 {
                        let Some(bucket) = hash.get(&[key[0] + dx, key[1] + dy, key[2] + dz]) else {
                            continue;
                        };
                        for &j in bucket {
                            if sep(pts[i], pts[j]) <= min_sep {
                                continue;
                            }
                            let d = (imgs[i] - imgs[j]).norm();
                            if d < cell && best.is_none_or(|b| d < b.0) {
                                best = Some((d, j));
                            }
                        }
                    }
                }
            }
            best.map(|(_, j)| (i.min(j), i.max(j)))
        })
        .collect();
    let bin = step * T::lit(4.0);
    let b = |x: T| (x / bin).round().to_f64_lossy() as i64;
    let mut seeds: BTreeMap<[i64; 4], ([T; 2], [T; 2])> = BTreeMap::new();
    for (i, j) in candidates {
        let [q, r] = ordered(pts[i], pts[j]);
        seeds.entry([b(q[0]), b(q[1]), b(r[0]), b(r[1])]).or_insert((q, r));
    }
    let seeds: Vec<([T; 2], [T; 2])> = seeds.into_values().collect();
    let min_final = step * T::lit(2.0);
    let mut found: Vec<([[T; 2]; 2], T)> = seeds
        .par_iter()
        .filter_map(|&(q, r)| {
            [1usize, 0].into_iter().find_map(|fixed| {
                refine(germ, region, q, r, fixed).filter(|(pair, res)| *res < tol && sep(pair[0], pair[1]) > min_final)
            })
        })
        .collect();
    found.sort_by(|a, b| {
        (a.0[0][1], a.0[0][0])
            .partial_cmp(&(b.0[0][1], b.0[0][0]))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let same = T::lit(1e-7) * (T::one() + region.scale());
    let mut pairs: Vec<[[T; 2]; 2]> = Vec::new();
    let mut residual = T::zero();
    for (pair, res) in found {
        if pairs
            .iter()
            .any(|p| sep(p[0], pair[0]) < same && sep(p[1], pair[1]) < same)
        {
            continue;
        }
        residual = residual.max(res);
        pairs.push(pair);
    }
    let image = pairs
        .iter()
        .map(|p| germ.point(p[0][0], p[0][1]))
        .collect::<Result<_, _>>()?;
    Ok(SelfIntersectionLocus {
        pairs,
        image,
        residual,
        grid_step: step,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub value: f64,
}

/// Self-intersection claims for one symmetry finding.
#[derive(Debug, Clone, Serialize)]
pub struct C2Report {
    /// No self-intersections: every check passes trivially.
    pub vacuous: bool,
    pub checks: Vec<Check>,
}

impl C2Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Checks that `ψ` swaps the preimages of every double point, that `T`
/// fixes the double-point image, that `ψ` has no fixed point on the locus
/// other than `p`, and for cuspidal cross caps that the double-point image
/// lies in the normal plane.
pub fn verify_c2<T: Real>(
    germ: &SurfaceGerm<T>,
    p: [T; 2],
    finding: &SymmetryFinding<T>,
    locus: &SelfIntersectionLocus<T>,
    tol: T,
) -> Result<C2Report, SymmetryError> {
    let ccr = germ.kind() == GermKind::CuspidalCrossCap;
    let mut names = vec!["f_psi_equals_f", "image_fixed_by_t", "psi_fixes_only_base"];
    if ccr {
        names.push("image_in_normal_plane");
    }
    if locus.is_empty() {
        return Ok(C2Report {
            vacuous: true,
            checks: names.into_iter().map(|name| Check { name, passed: true, value: 0.0 }).collect(),
        });
    }
    let t = finding.isometry;
    let moved = Moved { inner: germ, iso: t };
    let con = Connector::new(&moved, germ, boxed(&germ.domain()))?;
    let e = T::lit(finding.psi.as_ref().map_or(1, |i| i.map.sign) as f64);
    let frame = germ.distinguished_frame(p[0], p[1])?.frame;
    let cell = locus.grid_step * T::lit(2.0).sqrt();
    let rows: Vec<(T, T, Option<T>, T)> = locus
        .pairs
        .par_iter()
        .flat_map_iter(|pair| [(pair[0], pair[1]), (pair[1], pair[0])])
        .map(|(q, other)| {
            let fq = germ.point(q[0], q[1])?;
            let target = moved.point(&q)?;
            let tn = moved.normal(&q)?;
            let lift = |x: [T; 2]| -> Result<T, MatchError> {
                let a = germ.point(x[0], x[1])?;
                let n = germ.normal(x[0], x[1])?;
                Ok((v3(&target) - a).norm() + (v3(&tn) - n.scale(e)).norm())
            };
            let solved = con.solve(&q, e, None)?.psi;
            let mut psi = q;
            let mut best = lift(q)?;
            for c in [other, [solved[0], solved[1]]] {
                let d = lift(c)?;
                if d < best {
                    best = d;
                    psi = c;
                }
            }
            let f_psi = (germ.point(psi[0], psi[1])? - fq).norm();
            let t_fix = (t.apply(&fq) - fq).norm();
            let moved_by = (sep(q, p) > cell).then(|| sep(psi, q));
            let plane = frame.pi1().signed_distance(&fq).abs();
            Ok((f_psi, t_fix, moved_by, plane))
        })
        .collect::<Result<_, MatchError>>()?;
    let max = |k: fn(&(T, T, Option<T>, T)) -> T| rows.iter().map(k).fold(T::zero(), T::max).to_f64_lossy();
    let f_psi = max(|r| r.0);
    let t_fix = max(|r| r.1);
    let min_move = rows
        .iter()
        .filter_map(|r| r.2)
        .fold(T::infinity(), T::min)
        .to_f64_lossy();
    let tolf = tol.to_f64_lossy();
    let mut checks = vec![
        Check {
            name: "f_psi_equals_f",
            passed: f_psi < tolf,
            value: f_psi,
        },
        Check {
            name: "image_fixed_by_t",
            passed: t_fix < tolf,
            value: t_fix,
        },
        Check {
            name: "psi_fixes_only_base",
            passed: min_move > cell.to_f64_lossy(),
            value: min_move,
        },
    ];
    if ccr {
        let plane = max(|r| r.3);
        checks.push(Check {
            name: "image_in_normal_plane",
            passed: plane < tolf,
            value: plane,
        });
    }
    Ok(C2Report { vacuous: false, checks })
}
