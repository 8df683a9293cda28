use serde::{Deserialize, Serialize};

use crate::scalar::{Real, Scalar};

/// Natural cubic spline through `(x_i, y_i)`. Evaluation accepts any
/// [`Scalar`], so derivatives of the interpolant propagate through jets.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CubicSpline<T> {
    xs: Vec<T>,
    ys: Vec<T>,
    m: Vec<T>,
}

impl<T: Real> CubicSpline<T> {
    pub fn new(xs: Vec<T>, ys: Vec<T>) -> Self {
        assert_eq!(xs.len(), ys.len());
        assert!(xs.len() >= 2, "spline needs two knots");
        assert!(xs.windows(2).all(|w| w[0] < w[1]), "knots must increase");
        let n = xs.len();
        let mut m = vec![T::zero(); n];
        if n > 2 {
            // tridiagonal system for interior second derivatives (Thomas)
            let mut c = vec![T::zero(); n];
            let mut d = vec![T::zero(); n];
            for i in 1..n - 1 {
                let h0 = xs[i] - xs[i - 1];
                let h1 = xs[i + 1] - xs[i];
                let a = h0;
                let b = T::lit(2.0) * (h0 + h1);
                let cc = h1;
                let rhs = T::lit(6.0) * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
                let denom = b - a * c[i - 1];
                c[i] = cc / denom;
                d[i] = (rhs - a * d[i - 1]) / denom;
            }
            for i in (1..n - 1).rev() {
                m[i] = d[i] - c[i] * m[i + 1];
            }
        }
        CubicSpline { xs, ys, m }
    }

    pub fn knots(&self) -> &[T] {
        &self.xs
    }

    pub fn values(&self) -> &[T] {
        &self.ys
    }

    fn segment(&self, x: T) -> usize {
        let n = self.xs.len();
        match self
            .xs
            .binary_search_by(|k| k.partial_cmp(&x).unwrap_or(std::cmp::Ordering::Less))
        {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    pub fn eval<S: Scalar<T>>(&self, x: S) -> S {
        let i = self.segment(x.re());
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let a = (S::from_real(x1) - x) / h;
        let b = (x - x0) / h;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let six = T::lit(6.0);
        a * self.ys[i]
            + b * self.ys[i + 1]
            + (a * a * a - a) * (m0 * h * h / six)
            + (b * b * b - b) * (m1 * h * h / six)
    }

    pub fn map_values(&self, f: impl Fn(T, T) -> T) -> Self {
        let ys = self.xs.iter().zip(&self.ys).map(|(&x, &y)| f(x, y)).collect();
        CubicSpline::new(self.xs.clone(), ys)
    }
}

/// Bicubic Catmull–Rom interpolation on a uniform rectangular grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridInterpolant<T> {
    pub u0: T,
    pub du: T,
    pub w0: T,
    pub dw: T,
    pub nu: usize,
    pub nw: usize,
    /// Row-major: `values[iu * nw + iw]`.
    pub values: Vec<T>,
}

fn catmull_weights<S: Copy + std::ops::Mul<Output = S> + std::ops::Add<Output = S> + std::ops::Sub<Output = S>>(
    t: S,
    half: S,
    two: S,
    three: S,
) -> [S; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        half * (two * t2 - t3 - t),
        half * (three * t3 - (two + three) * t2 + two),
        half * ((two + two) * t2 + t - three * t3),
        half * (t3 - t2),
    ]
}

impl<T: Real> GridInterpolant<T> {
    pub fn new(u0: T, du: T, nu: usize, w0: T, dw: T, nw: usize, values: Vec<T>) -> Self {
        assert_eq!(values.len(), nu * nw);
        assert!(nu >= 2 && nw >= 2);
        GridInterpolant {
            u0,
            du,
            w0,
            dw,
            nu,
            nw,
            values,
        }
    }

    fn at(&self, iu: isize, iw: isize) -> T {
        let iu = iu.clamp(0, self.nu as isize - 1) as usize;
        let iw = iw.clamp(0, self.nw as isize - 1) as usize;
        self.values[iu * self.nw + iw]
    }

    pub fn eval<S: Scalar<T>>(&self, u: S, w: S) -> S {
        let su = (u - self.u0) / self.du;
        let sw = (w - self.w0) / self.dw;
        let iu = su.re().floor().to_isize().unwrap_or(0).clamp(0, self.nu as isize - 2);
        let iw = sw.re().floor().to_isize().unwrap_or(0).clamp(0, self.nw as isize - 2);
        let tu = su - T::lit(iu as f64);
        let tw = sw - T::lit(iw as f64);
        let c = |x: f64| S::from_real(T::lit(x));
        let wu = catmull_weights(tu, c(0.5), c(2.0), c(3.0));
        let ww = catmull_weights(tw, c(0.5), c(2.0), c(3.0));
        let mut acc = S::from_real(T::zero());
        for (a, wa) in wu.iter().enumerate() {
            let mut row = S::from_real(T::zero());
            for (b, wb) in ww.iter().enumerate() {
                row = row + *wb * self.at(iu + a as isize - 1, iw + b as isize - 1);
            }
            acc = acc + *wa * row;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::Jet;
    use approx::assert_abs_diff_eq;

    #[test]
    fn reproduces_knots_and_linear_data() {
        let xs: Vec<f64> = (0..9).map(|i| i as f64 * 0.25).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
        let s = CubicSpline::new(xs.clone(), ys.clone());
        for (x, y) in xs.iter().zip(&ys) {
            assert_abs_diff_eq!(s.eval(*x), *y, epsilon = 1e-14);
        }
        let j = s.eval(Jet::variable(0.6, 0, 1, 2));
        assert_abs_diff_eq!(j.partial(1, 0), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(j.partial(2, 0), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn smooth_data_is_accurate() {
        let xs: Vec<f64> = (0..129).map(|i| -2.0 + 4.0 * i as f64 / 128.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
        let s = CubicSpline::new(xs, ys);
        assert_abs_diff_eq!(s.eval(0.3337), 0.3337f64.sin(), epsilon = 1e-6);
    }

    #[test]
    fn catmull_rom_reproduces_bilinear() {
        let (nu, nw) = (6, 5);
        let mut vals = vec![];
        for i in 0..nu {
            for k in 0..nw {
                let (u, w) = (i as f64 * 0.5, -1.0 + k as f64 * 0.5);
                vals.push(1.0 + u - 2.0 * w + u * w);
            }
        }
        let g = GridInterpolant::new(0.0, 0.5, nu, -1.0, 0.5, nw, vals);
        let (u, w) = (1.3, 0.1);
        assert_abs_diff_eq!(g.eval(u, w), 1.0 + u - 2.0 * w + u * w, epsilon = 1e-12);
    }
}
