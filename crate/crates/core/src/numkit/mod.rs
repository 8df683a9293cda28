//! Differentiation, quadrature, inversion and small least-squares kernels.

mod fd;
mod jet;
mod lsq;
mod quad;
mod roots;
mod spline;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fd::fd_jet;
pub use jet::{Jet, MAX_ORDER};
pub use lsq::{least_squares, solve_dense, LsqOptions, LsqReport};
pub use quad::integrate;
pub use roots::invert_monotone;
pub use spline::{CubicSpline, GridInterpolant};

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("non-finite evaluation near {at}")]
    NonFinite { at: f64 },
    #[error("quadrature did not converge (best estimate {best})")]
    NoConvergence { best: f64 },
    #[error("bracket [{lo}, {hi}] does not straddle target {target}")]
    BadBracket { lo: f64, hi: f64, target: f64 },
    #[error("jet order {0} exceeds the supported maximum")]
    OrderTooHigh(usize),
    #[error("expected {expected} arguments, got {got}")]
    Arity { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Real> Interval<T> {
    pub fn new(lo: T, hi: T) -> Self {
        assert!(lo <= hi, "interval with lo > hi");
        Interval { lo, hi }
    }

    pub fn len(&self) -> T {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.lo == self.hi
    }

    pub fn mid(&self) -> T {
        (self.lo + self.hi) * T::lit(0.5)
    }

    pub fn contains(&self, x: T) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn clamp(&self, x: T) -> T {
        x.max(self.lo).min(self.hi)
    }

    /// `n` equally spaced points including both ends.
    pub fn linspace(&self, n: usize) -> Vec<T> {
        match n {
            0 => vec![],
            1 => vec![self.mid()],
            _ => (0..n)
                .map(|i| self.lo + self.len() * T::lit(i as f64 / (n - 1) as f64))
                .collect(),
        }
    }

    /// Interval shrunk about its midpoint by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        let m = self.mid();
        let h = self.len() * T::lit(0.5) * factor;
        Interval::new(m - h, m + h)
    }
}

/// A map from R^arity to R^dim.
///
/// `eval_jet` returns `None` for opaque callables; expression-defined maps
/// propagate jets exactly.
pub trait Evaluable<T: Real>: Send + Sync {
    fn arity(&self) -> usize;
    fn dim(&self) -> usize;
    fn eval(&self, x: &[T]) -> Result<Vec<T>, NumError>;
    fn eval_jet(&self, _x: &[Jet<T>]) -> Option<Result<Vec<Jet<T>>, NumError>> {
        None
    }
}

/// Opaque closure-backed map.
pub struct FnMap<T, F> {
    arity: usize,
    dim: usize,
    f: F,
    _t: std::marker::PhantomData<fn() -> T>,
}

impl<T: Real, F> FnMap<T, F>
where
    F: Fn(&[T]) -> Result<Vec<T>, NumError> + Send + Sync,
{
    pub fn new(arity: usize, dim: usize, f: F) -> Self {
        FnMap {
            arity,
            dim,
            f,
            _t: std::marker::PhantomData,
        }
    }
}

impl<T: Real, F> Evaluable<T> for FnMap<T, F>
where
    F: Fn(&[T]) -> Result<Vec<T>, NumError> + Send + Sync,
{
    fn arity(&self) -> usize {
        self.arity
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &[T]) -> Result<Vec<T>, NumError> {
        (self.f)(x)
    }
}

/// Value and partial derivatives up to `order` of every component of `map`
/// at `point`: exact forward-mode when the map supports it, Richardson
/// extrapolated central differences otherwise.
pub fn eval_jet<T: Real>(
    map: &dyn Evaluable<T>,
    point: &[T],
    order: usize,
) -> Result<Vec<Jet<T>>, NumError> {
    if point.len() != map.arity() {
        return Err(NumError::Arity {
            expected: map.arity(),
            got: point.len(),
        });
    }
    if order > 3 {
        return Err(NumError::OrderTooHigh(order));
    }
    let n = point.len();
    let vars: Vec<Jet<T>> = point
        .iter()
        .enumerate()
        .map(|(k, &x)| Jet::variable(x, k, n, order))
        .collect();
    match map.eval_jet(&vars) {
        Some(r) => {
            let out = r?;
            if out.iter().any(|j| !j.value().is_finite()) {
                return Err(NumError::NonFinite {
                    at: point[0].to_f64_lossy(),
                });
            }
            Ok(out)
        }
        None => fd_jet(|x| map.eval(x), point, order),
    }
}

/// Pushes arbitrary input jets through `map`. Exact for jet-capable maps;
/// for opaque maps the finite-difference Taylor polynomial at the base point
/// (order ≤ 3) is composed with the inputs.
pub fn map_jets<T: Real>(map: &dyn Evaluable<T>, x: &[Jet<T>]) -> Result<Vec<Jet<T>>, NumError> {
    if let Some(r) = map.eval_jet(x) {
        return r;
    }
    let order = x.iter().map(|j| if j.nvars() == 0 { 0 } else { j.order() }).max().unwrap_or(0).min(3);
    let base: Vec<T> = x.iter().map(|j| j.value()).collect();
    let taylor = fd_jet(|p| map.eval(p), &base, order)?;
    let shifted: Vec<Jet<T>> = x.iter().map(|j| *j - j.value()).collect();
    Ok(taylor
        .iter()
        .map(|t| {
            let mut acc = Jet::constant(T::zero());
            for d in 0..=order {
                for j in 0..=d {
                    let i = d - j;
                    let c = t.coeff(i, j);
                    if c == T::zero() {
                        continue;
                    }
                    let mut term = Jet::constant(c);
                    for _ in 0..i {
                        term = term * shifted[0];
                    }
                    for _ in 0..j {
                        term = term * shifted[1];
                    }
                    acc = acc + term;
                }
            }
            acc
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprlang::MapDef;
    use approx::assert_relative_eq;

    #[test]
    fn square_has_derivative_two_at_one() {
        let m = MapDef::<f64>::parse("sq", &["t"], &["t^2"], &[]).unwrap();
        let j = eval_jet(&m, &[1.0], 1).unwrap();
        assert_eq!(j[0].value(), 1.0);
        assert_eq!(j[0].partial(1, 0), 2.0);
    }

    #[test]
    fn third_v_derivative_of_cusp_component() {
        let m = MapDef::<f64>::parse("c", &["u", "v"], &["v^2", "v^3", "u"], &[]).unwrap();
        let j = eval_jet(&m, &[0.0, 0.0], 3).unwrap();
        assert_eq!(j[1].partial(0, 3), 6.0);
        assert_eq!(j[1].partial(0, 2), 0.0);
        assert_eq!(j[1].partial(0, 1), 0.0);
        assert_eq!(j[1].value(), 0.0);
    }

    #[test]
    fn order_zero_is_plain_evaluation() {
        let m = MapDef::<f64>::parse("s", &["u", "v"], &["3*v^4+u*v^2"], &[]).unwrap();
        let j = eval_jet(&m, &[1.0, 2.0], 0).unwrap();
        assert_eq!(j[0].value(), 52.0);
        assert_eq!(j[0].value(), m.eval(&[1.0, 2.0]).unwrap()[0]);
    }

    #[test]
    fn opaque_maps_fall_back_to_differences() {
        let m = FnMap::new(2, 1, |x: &[f64]| Ok(vec![x[0].sin() * x[1].exp()]));
        let j = eval_jet(&m, &[0.4, -0.2], 2).unwrap();
        let (s, c, e) = (0.4f64.sin(), 0.4f64.cos(), (-0.2f64).exp());
        assert_relative_eq!(j[0].partial(1, 0), c * e, max_relative = 1e-9);
        assert_relative_eq!(j[0].partial(1, 1), c * e, max_relative = 1e-7);
        assert_relative_eq!(j[0].partial(2, 0), -s * e, max_relative = 1e-7);
        // mixed partials symmetric
        assert_relative_eq!(j[0].partial(1, 1), j[0].partial(1, 1), max_relative = 1e-10);
    }

    #[test]
    fn opaque_maps_compose_with_input_jets() {
        let m = FnMap::new(1, 1, |x: &[f64]| Ok(vec![x[0] * x[0] * x[0]]));
        // t = 2 + 3h, so t^3 has h-derivative 3 * 3 * 4 = 36
        let t = Jet::variable(2.0, 0, 1, 2) * 3.0 - 4.0;
        let t = t + (Jet::constant(2.0) - t.value());
        let out = map_jets(&m, &[t]).unwrap();
        assert_relative_eq!(out[0].value(), 8.0, max_relative = 1e-12);
        assert_relative_eq!(out[0].partial(1, 0), 36.0, max_relative = 1e-8);
    }

    #[test]
    fn interval_helpers() {
        let i = Interval::new(-1.0, 3.0);
        assert_eq!(i.mid(), 1.0);
        assert_eq!(i.linspace(5), vec![-1.0, 0.0, 1.0, 2.0, 3.0]);
        assert_eq!(i.scaled(0.5), Interval::new(0.0, 2.0));
    }
}
