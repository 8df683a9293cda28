use std::sync::Arc;

use crate::exprlang::{ExprError, MapDef};
use crate::numkit::CubicSpline;
use crate::scalar::{Real, Scalar};

/// A real function of `u` or of `(u, v)` that can be evaluated on jets.
#[derive(Debug, Clone)]
pub enum ScalarFn<T: Real> {
    Const(T),
    /// Expression in `u` or in `u, v`.
    Expr(Arc<MapDef<T>>),
    /// Cubic spline in `u`.
    Spline(Arc<CubicSpline<T>>),
    /// `Σ_k c_k(u) v^k` with spline coefficients.
    Series(Arc<Vec<CubicSpline<T>>>),
    /// `sign · inner(u_scale·u + u_shift, v_scale·v)`.
    Transformed {
        inner: Box<ScalarFn<T>>,
        u_scale: T,
        u_shift: T,
        v_scale: T,
        sign: T,
    },
}

impl<T: Real> ScalarFn<T> {
    /// Parses an expression in the given variables (`["u"]` or `["u", "v"]`).
    pub fn expr(src: &str, vars: &[&str], params: &[(&str, T)]) -> Result<Self, ExprError> {
        Ok(ScalarFn::Expr(Arc::new(MapDef::parse(src, vars, &[src], params)?)))
    }

    pub fn spline(xs: Vec<T>, ys: Vec<T>) -> Self {
        ScalarFn::Spline(Arc::new(CubicSpline::new(xs, ys)))
    }

    pub fn transformed(&self, u_scale: T, u_shift: T, v_scale: T, sign: T) -> Self {
        ScalarFn::Transformed {
            inner: Box::new(self.clone()),
            u_scale,
            u_shift,
            v_scale,
            sign,
        }
    }

    pub fn negated(&self) -> Self {
        self.transformed(T::one(), T::zero(), T::one(), -T::one())
    }

    pub fn eval<S: Scalar<T>>(&self, u: S, v: S) -> Result<S, ExprError> {
        Ok(match self {
            ScalarFn::Const(c) => S::from_real(*c),
            ScalarFn::Expr(m) => {
                if m.vars().len() == 1 {
                    m.eval_component(0, &[u])?
                } else {
                    m.eval_component(0, &[u, v])?
                }
            }
            ScalarFn::Spline(s) => s.eval(u),
            ScalarFn::Series(cs) => {
                let mut acc = S::from_real(T::zero());
                for c in cs.iter().rev() {
                    acc = acc * v + c.eval(u);
                }
                acc
            }
            ScalarFn::Transformed {
                inner,
                u_scale,
                u_shift,
                v_scale,
                sign,
            } => inner.eval(u * *u_scale + *u_shift, v * *v_scale)? * *sign,
        })
    }

    pub fn value(&self, u: T, v: T) -> Result<T, ExprError> {
        self.eval(u, v)
    }

    /// True when the function cannot depend on `u`.
    pub fn is_const(&self) -> bool {
        match self {
            ScalarFn::Const(_) => true,
            ScalarFn::Transformed { inner, .. } => inner.is_const(),
            _ => false,
        }
    }
}
