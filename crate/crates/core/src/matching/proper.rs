use serde::{Deserialize, Serialize};

use crate::numkit::{Evaluable, Interval};
use crate::scalar::Real;

use super::MatchError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeOptions {
    pub r0: f64,
    pub levels: usize,
    /// Total number of grid samples per level (per axis in 1-d; the square
    /// root per axis in 2-d).
    pub grid: usize,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            r0: 0.5,
            levels: 8,
            grid: 4096,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Finite,
    SuspectedInfinite,
    Inconclusive,
}

/// Heuristic evidence for finiteness of `f⁻¹(f(p))` near `p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropernessReport {
    pub radii: Vec<f64>,
    pub counts: Vec<usize>,
    /// Diameter of the largest component relative to the window diameter.
    pub largest_extent: Vec<f64>,
    pub verdict: Verdict,
    pub method: &'static str,
}

/// Level-set components of `|f - f(p)| ≤ 1e-3 r` in the window `|x - p| ≤ r`
/// for `r = r0 2^-k`, on a fixed number of samples per window.
pub fn properness_probe<T: Real>(map: &dyn Evaluable<T>, p: &[T], opts: ProbeOptions) -> Result<PropernessReport, MatchError> {
    let n = map.arity();
    if n != p.len() || !(1..=2).contains(&n) {
        return Err(MatchError::Shape { arity: n, dim: map.dim() });
    }
    let target = value_at(map, p, T::lit(opts.r0))?;
    let mut radii = Vec::new();
    let mut counts = Vec::new();
    let mut extents = Vec::new();
    for k in 0..opts.levels {
        let r = T::lit(opts.r0 * 0.5f64.powi(k as i32));
        let delta = r * T::lit(1e-3);
        let (c, ext) = if n == 1 {
            level_1d(map, p[0], r, delta, &target, opts.grid)?
        } else {
            level_2d(map, p, r, delta, &target, (opts.grid as f64).sqrt().round() as usize)?
        };
        radii.push(r.to_f64_lossy());
        counts.push(c);
        extents.push(ext);
    }
    Ok(PropernessReport {
        verdict: verdict(&counts, &extents),
        radii,
        counts,
        largest_extent: extents,
        method: "grid level-set components (heuristic)",
    })
}

fn verdict(counts: &[usize], extents: &[f64]) -> Verdict {
    let m = counts.len();
    if m < 3 {
        return Verdict::Inconclusive;
    }
    let tail = m - 3;
    if extents[tail..].iter().all(|&e| e > 0.5) {
        // a component spanning every small window: a continuum of preimages
        return Verdict::SuspectedInfinite;
    }
    if counts[tail..].iter().all(|&c| c == counts[tail]) && counts[tail] > 0 {
        return Verdict::Finite;
    }
    if counts.windows(2).all(|w| w[1] >= w[0]) && counts[m - 1] > counts[0] {
        return Verdict::SuspectedInfinite;
    }
    Verdict::Inconclusive
}

/// `f(p)`, or the two-sided limit when `f` is undefined exactly at `p`.
fn value_at<T: Real>(map: &dyn Evaluable<T>, p: &[T], r0: T) -> Result<Vec<T>, MatchError> {
    if let Ok(v) = map.eval(p) {
        if v.iter().all(|x| x.is_finite()) {
            return Ok(v);
        }
    }
    let h = r0 * T::lit(1e-12);
    let plus: Vec<T> = p.iter().map(|x| *x + h).collect();
    let minus: Vec<T> = p.iter().map(|x| *x - h).collect();
    let (a, b) = (map.eval(&plus)?, map.eval(&minus)?);
    Ok(a.iter().zip(&b).map(|(x, y)| (*x + *y) * T::lit(0.5)).collect())
}

/// Whether the box spanned by the corner values meets the `delta`-box about
/// the target.
fn touches<T: Real>(corners: &[&Vec<T>], target: &[T], delta: T) -> bool {
    (0..target.len()).all(|k| {
        let (lo, hi) = corners.iter().fold((T::infinity(), T::neg_infinity()), |(a, b), c| (a.min(c[k]), b.max(c[k])));
        lo.is_finite() && hi.is_finite() && lo - delta <= target[k] && target[k] <= hi + delta
    })
}

fn eval_or_nan<T: Real>(map: &dyn Evaluable<T>, x: &[T]) -> Vec<T> {
    match map.eval(x) {
        Ok(v) => v,
        Err(_) => vec![T::nan(); map.dim()],
    }
}

fn level_1d<T: Real>(map: &dyn Evaluable<T>, p: T, r: T, delta: T, target: &[T], n: usize) -> Result<(usize, f64), MatchError> {
    let xs = Interval::new(p - r, p + r).linspace(n);
    let vals: Vec<Vec<T>> = xs.iter().map(|&x| eval_or_nan(map, &[x])).collect();
    let mut count = 0;
    let mut run = 0usize;
    let mut longest = 0usize;
    for i in 0..n - 1 {
        if touches(&[&vals[i], &vals[i + 1]], target, delta) {
            if run == 0 {
                count += 1;
            }
            run += 1;
            longest = longest.max(run);
        } else {
            run = 0;
        }
    }
    Ok((count, longest as f64 / (n - 1) as f64))
}

fn level_2d<T: Real>(map: &dyn Evaluable<T>, p: &[T], r: T, delta: T, target: &[T], n: usize) -> Result<(usize, f64), MatchError> {
    let xs = Interval::new(p[0] - r, p[0] + r).linspace(n);
    let ys = Interval::new(p[1] - r, p[1] + r).linspace(n);
    let vals: Vec<Vec<T>> = xs
        .iter()
        .flat_map(|&x| ys.iter().map(move |&y| (x, y)))
        .map(|(x, y)| eval_or_nan(map, &[x, y]))
        .collect();
    let m = n - 1;
    let at = |i: usize, j: usize| &vals[i * n + j];
    let inside: Vec<bool> = (0..m * m)
        .map(|c| {
            let (i, j) = (c / m, c % m);
            touches(&[at(i, j), at(i + 1, j), at(i, j + 1), at(i + 1, j + 1)], target, delta)
        })
        .collect();
    let mut label = vec![usize::MAX; m * m];
    let mut count = 0;
    let mut widest = 0usize;
    for start in 0..m * m {
        if !inside[start] || label[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        label[start] = count;
        let (mut i0, mut i1, mut j0, mut j1) = (usize::MAX, 0, usize::MAX, 0);
        while let Some(c) = stack.pop() {
            let (i, j) = (c / m, c % m);
            i0 = i0.min(i);
            i1 = i1.max(i);
            j0 = j0.min(j);
            j1 = j1.max(j);
            let mut nb = Vec::with_capacity(4);
            if i > 0 {
                nb.push(c - m);
            }
            if i + 1 < m {
                nb.push(c + m);
            }
            if j > 0 {
                nb.push(c - 1);
            }
            if j + 1 < m {
                nb.push(c + 1);
            }
            for d in nb {
                if inside[d] && label[d] == usize::MAX {
                    label[d] = count;
                    stack.push(d);
                }
            }
        }
        widest = widest.max((i1 - i0 + 1).max(j1 - j0 + 1));
        count += 1;
    }
    Ok((count, widest as f64 / m as f64))
}
