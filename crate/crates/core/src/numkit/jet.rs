//! Truncated multivariate Taylor polynomials (forward-mode jets).
//!
//! A `Jet` in one or two variables stores Taylor coefficients of total degree
//! at most `order` (≤ [`MAX_ORDER`]). Arithmetic truncates at the smaller
//! order of its operands, so constants never limit precision.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::scalar::{Real, Scalar};

pub const MAX_ORDER: usize = 8;
const SLOTS: usize = (MAX_ORDER + 1) * (MAX_ORDER + 2) / 2;

#[inline]
const fn idx(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

#[derive(Clone, Copy)]
pub struct Jet<T> {
    c: [T; SLOTS],
    order: u8,
    nvars: u8,
}

impl<T: Real> Jet<T> {
    pub fn constant(x: T) -> Self {
        let mut c = [T::zero(); SLOTS];
        c[0] = x;
        Jet {
            c,
            order: MAX_ORDER as u8,
            nvars: 0,
        }
    }

    /// Independent variable number `which` (0 or 1) of `nvars`, expanded at `x`.
    pub fn variable(x: T, which: usize, nvars: usize, order: usize) -> Self {
        assert!(which < nvars && nvars <= 2, "jets support at most two variables");
        assert!(order <= MAX_ORDER, "jet order above {MAX_ORDER}");
        let mut c = [T::zero(); SLOTS];
        c[0] = x;
        if order >= 1 {
            c[if which == 0 { idx(1, 0) } else { idx(0, 1) }] = T::one();
        }
        Jet {
            c,
            order: order as u8,
            nvars: nvars as u8,
        }
    }

    /// Builds a univariate jet from Taylor coefficients `a_0, a_1, ...`.
    pub fn from_series(coeffs: &[T]) -> Self {
        assert!(!coeffs.is_empty() && coeffs.len() <= MAX_ORDER + 1);
        let mut c = [T::zero(); SLOTS];
        for (k, &a) in coeffs.iter().enumerate() {
            c[idx(k, 0)] = a;
        }
        Jet {
            c,
            order: (coeffs.len() - 1) as u8,
            nvars: 1,
        }
    }

    pub fn order(&self) -> usize {
        self.order as usize
    }

    pub fn nvars(&self) -> usize {
        self.nvars as usize
    }

    pub fn value(&self) -> T {
        self.c[0]
    }

    /// Taylor coefficient of `h_u^i h_v^j`.
    pub fn coeff(&self, i: usize, j: usize) -> T {
        if self.in_range(i, j) {
            self.c[idx(i, j)]
        } else {
            T::zero()
        }
    }

    pub fn set_coeff(&mut self, i: usize, j: usize, x: T) {
        assert!(self.in_range(i, j), "coefficient ({i},{j}) outside jet");
        self.c[idx(i, j)] = x;
    }

    /// The mixed partial derivative ∂^(i+j) / ∂u^i ∂v^j.
    pub fn partial(&self, i: usize, j: usize) -> T {
        self.coeff(i, j) * T::lit(factorial(i) * factorial(j))
    }

    /// Univariate coefficients `a_0..=a_order`.
    pub fn series(&self) -> Vec<T> {
        (0..=self.order()).map(|k| self.coeff(k, 0)).collect()
    }

    #[inline]
    fn in_range(&self, i: usize, j: usize) -> bool {
        i + j <= self.order as usize
            && match self.nvars {
                0 => i == 0 && j == 0,
                1 => j == 0,
                _ => true,
            }
    }

    fn slots(order: usize, nvars: usize) -> impl Iterator<Item = (usize, usize)> {
        let order = if nvars == 0 { 0 } else { order };
        (0..=order).flat_map(move |d| {
            let jmax = if nvars >= 2 { d } else { 0 };
            (0..=jmax).map(move |j| (d - j, j))
        })
    }

    fn blank(order: usize, nvars: usize) -> Self {
        Jet {
            c: [T::zero(); SLOTS],
            order: order as u8,
            nvars: nvars as u8,
        }
    }

    fn combine_shape(&self, o: &Self) -> (usize, usize) {
        (
            self.order().min(o.order()),
            self.nvars().max(o.nvars()),
        )
    }

    /// Reduces the truncation order.
    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order());
        let mut r = Self::blank(order, self.nvars());
        for (i, j) in Self::slots(order, self.nvars()) {
            r.c[idx(i, j)] = self.c[idx(i, j)];
        }
        r
    }

    /// Partial derivative jet with respect to variable `which`; one order lower.
    pub fn derivative(&self, which: usize) -> Self {
        if self.nvars == 0 {
            return Self::constant(T::zero());
        }
        let order = self.order().saturating_sub(1);
        let mut r = Self::blank(order, self.nvars());
        if self.order() == 0 {
            return r;
        }
        for (i, j) in Self::slots(order, self.nvars()) {
            r.c[idx(i, j)] = if which == 0 {
                self.coeff(i + 1, j) * T::lit((i + 1) as f64)
            } else {
                self.coeff(i, j + 1) * T::lit((j + 1) as f64)
            };
        }
        r
    }

    /// Antiderivative of a univariate jet vanishing at the expansion point.
    pub fn integral(&self) -> Self {
        assert!(self.nvars() <= 1);
        let order = (self.order() + 1).min(MAX_ORDER);
        let mut r = Self::blank(order, 1);
        for k in 1..=order {
            r.c[idx(k, 0)] = self.coeff(k - 1, 0) / T::lit(k as f64);
        }
        r
    }

    /// Divides a univariate jet by `h^k`, given its first `k` coefficients vanish.
    /// The result loses `k` orders.
    pub fn shift_down(&self, k: usize) -> Self {
        assert!(self.nvars() <= 1 && k <= self.order());
        let order = self.order() - k;
        let mut r = Self::blank(order, 1);
        for m in 0..=order {
            r.c[idx(m, 0)] = self.coeff(m + k, 0);
        }
        r
    }

    /// Multiplies a univariate jet by `h^k` (order unchanged, high terms dropped).
    pub fn shift_up(&self, k: usize) -> Self {
        assert!(self.nvars() <= 1);
        let mut r = Self::blank(self.order(), 1);
        for m in k..=self.order() {
            r.c[idx(m, 0)] = self.coeff(m - k, 0);
        }
        r
    }

    /// Composition `g(self)` where `g(a + h) = Σ coeffs[k] h^k` around `a = self.value()`.
    pub fn compose(&self, coeffs: &[T]) -> Self {
        if self.nvars == 0 {
            return Self::constant(coeffs[0]);
        }
        let order = self.order();
        let mut h = *self;
        h.c[0] = T::zero();
        let top = order.min(coeffs.len() - 1);
        let mut r = Self::constant(coeffs[top]);
        for k in (0..top).rev() {
            r = r * h + coeffs[k];
        }
        r.truncate(order)
    }

    /// Evaluates the univariate polynomial `self` at argument jet `x`
    /// (i.e. treats `self` as a Taylor series around its expansion point `x0`).
    pub fn compose_series_at(&self, x: &Jet<T>, x0: T) -> Jet<T> {
        // cheap paths keep the shape the general product would give
        let coeffs = self.series();
        if self.nvars == 0 || (x.nvars > 0 && x.order == 0) {
            let h = x.value() - x0;
            let v = coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * h + c);
            let (order, nvars) = if x.nvars == 0 { (MAX_ORDER, 0) } else { (x.order(), x.nvars()) };
            let mut r = Self::blank(order, nvars);
            r.c[0] = v;
            return r;
        }
        let shifted = *x - x0;
        let mut r = Jet::constant(coeffs[coeffs.len() - 1]);
        for k in (0..coeffs.len() - 1).rev() {
            r = r * shifted + coeffs[k];
        }
        r
    }

    /// Series reversion of a univariate jet with zero constant and nonzero
    /// linear term: returns `g` with `self(g(w)) = w`.
    pub fn revert(&self) -> Option<Self> {
        let a1 = self.coeff(1, 0);
        if self.value() != T::zero() || a1 == T::zero() {
            return None;
        }
        let order = self.order();
        let w = Jet::variable(T::zero(), 0, 1, order);
        let mut g = w / a1;
        for _ in 0..order {
            let fg = self.compose_series_at(&g, T::zero());
            g = g - (fg - w) / a1;
        }
        Some(g)
    }

    fn binary_mul(&self, o: &Self) -> Self {
        if self.nvars == 0 {
            let mut r = *o;
            let k = self.c[0];
            for (i, j) in Self::slots(o.order(), o.nvars()) {
                r.c[idx(i, j)] = r.c[idx(i, j)] * k;
            }
            return r;
        }
        if o.nvars == 0 {
            return o.binary_mul(self);
        }
        let (order, nv) = self.combine_shape(o);
        let mut r = Self::blank(order, nv);
        for (i, j) in Self::slots(order, nv) {
            let mut acc = T::zero();
            for a in 0..=i {
                for b in 0..=j {
                    let x = self.coeff(a, b);
                    if x == T::zero() {
                        continue;
                    }
                    acc = acc + x * o.coeff(i - a, j - b);
                }
            }
            r.c[idx(i, j)] = acc;
        }
        r
    }

    fn sincos_coeffs(a: T, order: usize) -> (Vec<T>, Vec<T>) {
        let (s, c) = (a.sin(), a.cos());
        let cyc_s = [s, c, -s, -c];
        let cyc_c = [c, -s, -c, s];
        let mut vs = Vec::with_capacity(order + 1);
        let mut vc = Vec::with_capacity(order + 1);
        for k in 0..=order {
            let f = T::lit(factorial(k));
            vs.push(cyc_s[k % 4] / f);
            vc.push(cyc_c[k % 4] / f);
        }
        (vs, vc)
    }

    fn pow_coeffs(a: T, p: T, order: usize) -> Vec<T> {
        let mut out = Vec::with_capacity(order + 1);
        let mut binom = T::one();
        for k in 0..=order {
            if k > 0 {
                binom = binom * (p - T::lit((k - 1) as f64)) / T::lit(k as f64);
            }
            out.push(binom * a.powf(p - T::lit(k as f64)));
        }
        out
    }

    fn eff_order(&self) -> usize {
        if self.nvars == 0 {
            0
        } else {
            self.order()
        }
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

impl<T: Real> fmt::Debug for Jet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_map();
        for (i, j) in Self::slots(self.order(), self.nvars()) {
            list.entry(&(i, j), &self.c[idx(i, j)]);
        }
        list.finish()
    }
}

impl<T: Real> PartialEq for Jet<T> {
    fn eq(&self, o: &Self) -> bool {
        let (order, nv) = self.combine_shape(o);
        Self::slots(order, nv).all(|(i, j)| self.coeff(i, j) == o.coeff(i, j))
    }
}

impl<T: Real> Add for Jet<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let (order, nv) = self.combine_shape(&o);
        let mut r = Self::blank(order, nv);
        for (i, j) in Self::slots(order, nv) {
            r.c[idx(i, j)] = self.coeff(i, j) + o.coeff(i, j);
        }
        r
    }
}

impl<T: Real> Sub for Jet<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let (order, nv) = self.combine_shape(&o);
        let mut r = Self::blank(order, nv);
        for (i, j) in Self::slots(order, nv) {
            r.c[idx(i, j)] = self.coeff(i, j) - o.coeff(i, j);
        }
        r
    }
}

impl<T: Real> Mul for Jet<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        self.binary_mul(&o)
    }
}

impl<T: Real> Div for Jet<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        if o.nvars == 0 {
            return self / o.c[0];
        }
        self * Scalar::recip(o)
    }
}

impl<T: Real> Neg for Jet<T> {
    type Output = Self;
    fn neg(self) -> Self {
        let mut r = self;
        for (i, j) in Self::slots(self.order(), self.nvars()) {
            r.c[idx(i, j)] = -r.c[idx(i, j)];
        }
        r
    }
}

impl<T: Real> Add<T> for Jet<T> {
    type Output = Self;
    fn add(mut self, k: T) -> Self {
        self.c[0] = self.c[0] + k;
        self
    }
}

impl<T: Real> Sub<T> for Jet<T> {
    type Output = Self;
    fn sub(mut self, k: T) -> Self {
        self.c[0] = self.c[0] - k;
        self
    }
}

impl<T: Real> Mul<T> for Jet<T> {
    type Output = Self;
    fn mul(self, k: T) -> Self {
        let mut r = self;
        for (i, j) in Self::slots(self.order(), self.nvars()) {
            r.c[idx(i, j)] = r.c[idx(i, j)] * k;
        }
        r
    }
}

impl<T: Real> Div<T> for Jet<T> {
    type Output = Self;
    fn div(self, k: T) -> Self {
        let mut r = self;
        for (i, j) in Self::slots(self.order(), self.nvars()) {
            r.c[idx(i, j)] = r.c[idx(i, j)] / k;
        }
        r
    }
}

impl<T: Real> Scalar<T> for Jet<T> {
    fn from_real(x: T) -> Self {
        Jet::constant(x)
    }

    fn re(&self) -> T {
        self.c[0]
    }

    fn is_constant(&self) -> bool {
        Self::slots(self.order(), self.nvars())
            .skip(1)
            .all(|(i, j)| self.c[idx(i, j)] == T::zero())
    }

    fn sin(self) -> Self {
        let (s, _) = Self::sincos_coeffs(self.c[0], self.eff_order());
        self.compose(&s)
    }

    fn cos(self) -> Self {
        let (_, c) = Self::sincos_coeffs(self.c[0], self.eff_order());
        self.compose(&c)
    }

    fn tan(self) -> Self {
        Scalar::sin(self) / Scalar::cos(self)
    }

    fn exp(self) -> Self {
        let e = self.c[0].exp();
        let coeffs: Vec<T> = (0..=self.eff_order())
            .map(|k| e / T::lit(factorial(k)))
            .collect();
        self.compose(&coeffs)
    }

    fn ln(self) -> Self {
        let a = self.c[0];
        let mut coeffs = vec![a.ln()];
        for k in 1..=self.eff_order() {
            let sign = if k % 2 == 1 { T::one() } else { -T::one() };
            coeffs.push(sign / (T::lit(k as f64) * a.powi(k as i32)));
        }
        self.compose(&coeffs)
    }

    fn sqrt(self) -> Self {
        Scalar::powf(self, T::lit(0.5))
    }

    fn atan(self) -> Self {
        let a = self.c[0];
        let order = self.eff_order();
        // 1/(1 + (a+h)^2) = 1/(q0 + q1 h + q2 h^2)
        let q0 = T::one() + a * a;
        let q1 = a + a;
        let mut r: Vec<T> = Vec::with_capacity(order + 1);
        for n in 0..order {
            let mut v = if n == 0 { T::one() } else { T::zero() };
            if n >= 1 {
                v = v - q1 * r[n - 1];
            }
            if n >= 2 {
                v = v - r[n - 2];
            }
            r.push(v / q0);
        }
        let mut coeffs = vec![a.atan()];
        for k in 1..=order {
            coeffs.push(r[k - 1] / T::lit(k as f64));
        }
        self.compose(&coeffs)
    }

    fn powi(self, n: i32) -> Self {
        if n < 0 {
            return Scalar::recip(Scalar::powi(self, -n));
        }
        let mut base = self;
        let mut e = n as u32;
        let mut acc = Jet::constant(T::one());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            e >>= 1;
            if e > 0 {
                base = base * base;
            }
        }
        acc
    }

    fn powf(self, p: T) -> Self {
        if p == p.round() && p.abs() <= T::lit(64.0) {
            return Scalar::powi(self, p.to_i32().unwrap_or(0));
        }
        let coeffs = Self::pow_coeffs(self.c[0], p, self.eff_order());
        self.compose(&coeffs)
    }

    fn recip(self) -> Self {
        let a = self.c[0];
        let mut coeffs = Vec::with_capacity(self.eff_order() + 1);
        let mut term = T::one() / a;
        for _ in 0..=self.eff_order() {
            coeffs.push(term);
            term = -term / a;
        }
        self.compose(&coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    type J = Jet<f64>;

    #[test]
    fn product_rule_bivariate() {
        let u = J::variable(1.0, 0, 2, 3);
        let v = J::variable(2.0, 1, 2, 3);
        // 3 v^4 + u v^2
        let f = v.powi(4) * 3.0 + u * v * v;
        assert_relative_eq!(f.value(), 52.0);
        assert_relative_eq!(f.partial(1, 0), 4.0);
        assert_relative_eq!(f.partial(0, 1), 12.0 * 8.0 + 2.0 * 2.0);
        assert_relative_eq!(f.partial(1, 1), 4.0);
        assert_relative_eq!(f.partial(0, 3), 72.0 * 2.0);
    }

    #[test]
    fn elementary_functions_match_closed_forms() {
        let x = J::variable(0.3, 0, 1, 4);
        let s = Scalar::sin(x);
        assert_relative_eq!(s.partial(3, 0), -(0.3f64).cos(), epsilon = 1e-14);
        let a = Scalar::atan(x);
        // d/dx atan = 1/(1+x^2); second derivative -2x/(1+x^2)^2
        assert_relative_eq!(a.partial(1, 0), 1.0 / 1.09, epsilon = 1e-14);
        assert_relative_eq!(a.partial(2, 0), -0.6 / (1.09 * 1.09), epsilon = 1e-14);
        let r = Scalar::sqrt(x);
        assert_relative_eq!(r.partial(2, 0), -0.25 * 0.3f64.powf(-1.5), epsilon = 1e-12);
        let l = Scalar::ln(x);
        assert_relative_eq!(l.partial(3, 0), 2.0 / 0.027, epsilon = 1e-10);
        let e = Scalar::exp(x);
        assert_relative_eq!(e.partial(4, 0), 0.3f64.exp(), epsilon = 1e-13);
        let q = x / (x + 1.0);
        assert_relative_eq!(q.partial(1, 0), 1.0 / 1.69, epsilon = 1e-14);
    }

    #[test]
    fn integer_power_at_zero_is_exact() {
        let v = J::variable(0.0, 1, 2, 3);
        let f = Scalar::powf(v, 3.0);
        assert_eq!(f.partial(0, 3), 6.0);
        assert_eq!(f.partial(0, 2), 0.0);
        assert_eq!(f.partial(0, 1), 0.0);
    }

    #[test]
    fn series_reversion_inverts() {
        // w(v) = v + v^2/2 + v^3
        let w = J::from_series(&[0.0, 1.0, 0.5, 1.0, 0.0, 0.0]);
        let g = w.revert().unwrap();
        let back = w.compose_series_at(&g, 0.0);
        let s = back.series();
        assert_relative_eq!(s[1], 1.0, epsilon = 1e-14);
        for c in &s[2..] {
            assert!(c.abs() < 1e-13, "{s:?}");
        }
    }

    #[test]
    fn mixed_orders_truncate_to_smaller() {
        let a = J::variable(1.0, 0, 1, 2);
        let b = J::variable(1.0, 0, 1, 5);
        assert_eq!((a * b).order(), 2);
        assert_eq!((a + 1.0).order(), 2);
    }
}
