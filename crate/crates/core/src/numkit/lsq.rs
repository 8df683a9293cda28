use crate::numkit::NumError;
use crate::scalar::Real;

/// Solves `a x = b` (row-major `n×n`) by Gaussian elimination with partial
/// pivoting. Returns `None` for a numerically singular matrix.
pub fn solve_dense<T: Real>(a: &[T], b: &[T], n: usize) -> Option<Vec<T>> {
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| {
            m[i * n + col]
                .abs()
                .partial_cmp(&m[j * n + col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if m[piv * n + col].abs() <= T::min_positive_value() {
            return None;
        }
        if piv != col {
            for k in 0..n {
                m.swap(piv * n + k, col * n + k);
            }
            x.swap(piv, col);
        }
        for r in col + 1..n {
            let f = m[r * n + col] / m[col * n + col];
            if f == T::zero() {
                continue;
            }
            for k in col..n {
                m[r * n + k] = m[r * n + k] - f * m[col * n + k];
            }
            x[r] = x[r] - f * x[col];
        }
    }
    for r in (0..n).rev() {
        let mut s = x[r];
        for k in r + 1..n {
            s = s - m[r * n + k] * x[k];
        }
        x[r] = s / m[r * n + r];
    }
    Some(x)
}

#[derive(Debug, Clone, Copy)]
pub struct LsqOptions<T> {
    pub max_iter: usize,
    /// Stop once the residual norm falls below this.
    pub residual_tol: T,
    /// Stop once a step is shorter than this.
    pub step_tol: T,
}

impl<T: Real> Default for LsqOptions<T> {
    fn default() -> Self {
        LsqOptions {
            max_iter: 60,
            residual_tol: T::lit(1e-15),
            step_tol: T::epsilon() * T::lit(4.0),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LsqReport<T> {
    pub x: Vec<T>,
    pub residual: T,
    pub iterations: usize,
}

/// Levenberg–Marquardt on a small dense problem with a forward-difference
/// Jacobian. `clamp` projects iterates back into the feasible box.
pub fn least_squares<T: Real>(
    residual: impl Fn(&[T]) -> Result<Vec<T>, NumError>,
    x0: &[T],
    clamp: impl Fn(&mut [T]),
    opts: LsqOptions<T>,
) -> Result<LsqReport<T>, NumError> {
    let n = x0.len();
    let norm = |r: &[T]| r.iter().fold(T::zero(), |s, v| s + *v * *v).sqrt();
    let mut x = x0.to_vec();
    clamp(&mut x);
    let mut r = residual(&x)?;
    let mut cost = norm(&r);
    let mut lambda = T::lit(1e-3);
    let mut it = 0;
    while it < opts.max_iter && cost > opts.residual_tol {
        it += 1;
        let m = r.len();
        let mut jac = vec![T::zero(); m * n];
        for k in 0..n {
            let h = T::epsilon().sqrt() * T::one().max(x[k].abs());
            let mut xp = x.clone();
            xp[k] = xp[k] + h;
            let mut xm = x.clone();
            xm[k] = xm[k] - h;
            let (rp, rm) = (residual(&xp)?, residual(&xm)?);
            for i in 0..m {
                jac[i * n + k] = (rp[i] - rm[i]) / (h + h);
            }
        }
        let mut jtj = vec![T::zero(); n * n];
        let mut jtr = vec![T::zero(); n];
        for i in 0..m {
            for a in 0..n {
                jtr[a] = jtr[a] + jac[i * n + a] * r[i];
                for b in 0..n {
                    jtj[a * n + b] = jtj[a * n + b] + jac[i * n + a] * jac[i * n + b];
                }
            }
        }
        let diag_scale = (0..n).fold(T::zero(), |s, a| s.max(jtj[a * n + a]));
        let mut accepted = false;
        for _ in 0..12 {
            let mut sys = jtj.clone();
            for a in 0..n {
                sys[a * n + a] = sys[a * n + a] + lambda * (jtj[a * n + a] + diag_scale * T::lit(1e-12) + T::lit(1e-300));
            }
            let neg: Vec<T> = jtr.iter().map(|v| -*v).collect();
            let Some(step) = solve_dense(&sys, &neg, n) else {
                lambda = lambda * T::lit(10.0);
                continue;
            };
            let mut xn: Vec<T> = x.iter().zip(&step).map(|(a, b)| *a + *b).collect();
            clamp(&mut xn);
            let rn = match residual(&xn) {
                Ok(v) => v,
                Err(_) => {
                    lambda = lambda * T::lit(10.0);
                    continue;
                }
            };
            let cn = norm(&rn);
            if cn < cost {
                let moved = x
                    .iter()
                    .zip(&xn)
                    .fold(T::zero(), |s, (a, b)| s.max((*a - *b).abs()));
                x = xn;
                r = rn;
                cost = cn;
                lambda = (lambda * T::lit(0.2)).max(T::lit(1e-12));
                accepted = true;
                if moved <= opts.step_tol {
                    return Ok(LsqReport { x, residual: cost, iterations: it });
                }
                break;
            }
            lambda = lambda * T::lit(10.0);
        }
        if !accepted {
            break;
        }
    }
    Ok(LsqReport {
        x,
        residual: cost,
        iterations: it,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn dense_solve() {
        let a = [2.0, 1.0, 1.0, 3.0];
        let x = solve_dense(&a, &[3.0, 5.0], 2).unwrap();
        assert_abs_diff_eq!(x[0], 0.8, epsilon = 1e-14);
        assert_abs_diff_eq!(x[1], 1.4, epsilon = 1e-14);
        assert!(solve_dense(&[1.0, 2.0, 2.0, 4.0], &[1.0, 1.0], 2).is_none());
    }

    #[test]
    fn rosenbrock_residuals() {
        let res = |x: &[f64]| Ok(vec![10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]]);
        let rep = least_squares(res, &[-1.2, 1.0], |_| {}, LsqOptions::default()).unwrap();
        assert_abs_diff_eq!(rep.x[0], 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(rep.x[1], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn underdetermined_projects_onto_solution_set() {
        // one equation, two unknowns: x^2 + y^2 = 1
        let res = |x: &[f64]| Ok(vec![x[0] * x[0] + x[1] * x[1] - 1.0]);
        let rep = least_squares(res, &[0.3, 0.4], |_| {}, LsqOptions::default()).unwrap();
        assert!(rep.residual < 1e-13);
    }
}
