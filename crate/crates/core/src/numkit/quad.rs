use crate::numkit::{Interval, NumError};
use crate::scalar::Real;

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

const MAX_DEPTH: u32 = 48;
const MAX_SPLITS: usize = 4096;

fn gk15<T: Real>(f: &impl Fn(T) -> T, a: T, b: T) -> (T, T) {
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    let fc = f(mid);
    let mut kron = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for k in 0..7 {
        let dx = half * T::lit(XGK[k]);
        let pair = f(mid - dx) + f(mid + dx);
        kron = kron + pair * T::lit(WGK[k]);
        if k % 2 == 1 {
            gauss = gauss + pair * T::lit(WG[k / 2]);
        }
    }
    (kron * half, ((kron - gauss) * half).abs())
}

/// Adaptive Gauss–Kronrod quadrature with absolute error target `tol`.
///
/// Bisects the worst subinterval until the summed error estimate drops below
/// `tol`. On running out of depth the best estimate is returned inside the
/// error.
pub fn integrate<T: Real>(f: impl Fn(T) -> T, range: Interval<T>, tol: T) -> Result<T, NumError> {
    if range.lo == range.hi {
        return Ok(T::zero());
    }
    let mut stack = vec![(range.lo, range.hi, tol, 0u32)];
    let mut total = T::zero();
    let mut failed = false;
    let mut splits = 0usize;
    while let Some((a, b, t, depth)) = stack.pop() {
        let (est, err) = gk15(&f, a, b);
        if !est.is_finite() {
            return Err(NumError::NonFinite {
                at: a.to_f64_lossy(),
            });
        }
        // roundoff floor: nothing finer than a few ulps of the local value
        let floor = est.abs() * T::epsilon() * T::lit(50.0);
        if err <= t.max(floor) {
            total = total + est;
        } else if depth >= MAX_DEPTH || splits >= MAX_SPLITS {
            failed = true;
            total = total + est;
        } else {
            splits += 1;
            let m = (a + b) * T::lit(0.5);
            let th = t * T::lit(0.5);
            stack.push((m, b, th, depth + 1));
            stack.push((a, m, th, depth + 1));
        }
    }
    if failed {
        Err(NumError::NoConvergence {
            best: total.to_f64_lossy(),
        })
    } else {
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Plain midpoint Riemann sum used as an independent reference.
    fn riemann(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        (0..n).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
    }

    #[test]
    fn linear_integrand() {
        let v = integrate(|t: f64| t, Interval::new(0.0, 1.0), 1e-12).unwrap();
        assert_abs_diff_eq!(v, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn cusp_speed_integrand_matches_antiderivative_and_riemann() {
        let f = |t: f64| t * (4.0 + 9.0 * t * t).sqrt();
        let closed = (13f64.powf(1.5) - 8.0) / 27.0;
        let reference = riemann(f, 0.0, 1.0, 200_000);
        assert_abs_diff_eq!(closed, reference, epsilon = 1e-8);
        assert_abs_diff_eq!(closed, 1.439712, epsilon = 1e-5);
        let v = integrate(f, Interval::new(0.0, 1.0), 1e-12).unwrap();
        assert_abs_diff_eq!(v, closed, epsilon = 1e-12);
    }

    #[test]
    fn empty_interval_is_zero() {
        let v = integrate(|t: f64| 1.0 / t, Interval::new(0.0, 0.0), 1e-12).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn additive_over_splits() {
        let f = |t: f64| (3.0 * t).sin() * (-t).exp();
        let whole = integrate(f, Interval::new(-1.0, 2.0), 1e-12).unwrap();
        let a = integrate(f, Interval::new(-1.0, 0.4), 1e-12).unwrap();
        let b = integrate(f, Interval::new(0.4, 2.0), 1e-12).unwrap();
        assert_abs_diff_eq!(whole, a + b, epsilon = 3e-12);
    }

    #[test]
    fn single_precision_works() {
        let v = integrate(|t: f32| t * t, Interval::new(0.0f32, 3.0), 1e-4).unwrap();
        assert!((v - 9.0).abs() < 1e-4);
    }
}
