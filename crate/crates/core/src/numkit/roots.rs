use crate::numkit::{Interval, NumError};
use crate::scalar::Real;

/// Inverts a strictly monotone function on a bracket.
///
/// Safeguarded secant: each step takes the secant point when it falls inside
/// the current bracket and shrinks it fast enough, otherwise bisects.
pub fn invert_monotone<T: Real>(
    g: impl Fn(T) -> T,
    target: T,
    bracket: Interval<T>,
    tol: T,
) -> Result<T, NumError> {
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let mut fa = g(a) - target;
    let mut fb = g(b) - target;
    if !fa.is_finite() || !fb.is_finite() {
        return Err(NumError::NonFinite {
            at: if fa.is_finite() { b } else { a }.to_f64_lossy(),
        });
    }
    if fa.abs() <= tol {
        return Ok(a);
    }
    if fb.abs() <= tol {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(NumError::BadBracket {
            lo: a.to_f64_lossy(),
            hi: b.to_f64_lossy(),
            target: target.to_f64_lossy(),
        });
    }
    let mut last_width = b - a;
    for _ in 0..200 {
        let width = b - a;
        let mut x = a - fa * (b - a) / (fb - fa);
        let inside = x > a && x < b;
        if !inside || width > last_width * T::lit(0.5) {
            x = (a + b) * T::lit(0.5);
        }
        last_width = width;
        let fx = g(x) - target;
        if fx.abs() <= tol || width <= T::epsilon() * (a.abs() + b.abs()) {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
    }
    Ok((a + b) * T::lit(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::integrate;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cube_root() {
        let x = invert_monotone(|t: f64| t * t * t, 0.008, Interval::new(0.0, 1.0), 1e-15).unwrap();
        assert_abs_diff_eq!(x, 0.2, epsilon = 1e-12);
    }

    #[test]
    fn identity() {
        let x = invert_monotone(|t: f64| t, 0.37, Interval::new(0.0, 1.0), 1e-15).unwrap();
        assert_abs_diff_eq!(x, 0.37, epsilon = 1e-14);
    }

    #[test]
    fn inverts_cumulative_quadrature() {
        let g = |t: f64| {
            integrate(|s: f64| s * (4.0 + 9.0 * s * s).sqrt(), Interval::new(0.0, t), 1e-13).unwrap()
        };
        let target = (13f64.powf(1.5) - 8.0) / 27.0;
        let x = invert_monotone(g, target, Interval::new(0.0, 2.0), 1e-12).unwrap();
        assert_abs_diff_eq!(x, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn rejects_non_straddling_bracket() {
        let r = invert_monotone(|t: f64| t, 5.0, Interval::new(0.0, 1.0), 1e-12);
        assert!(matches!(r, Err(NumError::BadBracket { .. })));
    }

    #[test]
    fn decreasing_functions_invert_too() {
        let x = invert_monotone(|t: f64| (-t).exp(), 0.5, Interval::new(0.0, 3.0), 1e-14).unwrap();
        assert_abs_diff_eq!(x, 2f64.ln(), epsilon = 1e-12);
    }
}
