use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{is_constant_name, parse, BinOp, Expr, ExprError, Func};
use crate::numkit::{Evaluable, Jet, NumError};
use crate::scalar::{Real, Scalar};

#[derive(Debug, Clone)]
enum Node<T> {
    Const(T),
    Var(usize),
    Neg(Box<Node<T>>),
    Add(Box<Node<T>>, Box<Node<T>>),
    Sub(Box<Node<T>>, Box<Node<T>>),
    Mul(Box<Node<T>>, Box<Node<T>>),
    Div(Box<Node<T>>, Box<Node<T>>, Arc<str>),
    PowI(Box<Node<T>>, i32),
    PowF(Box<Node<T>>, T, Arc<str>),
    PowGeneral(Box<Node<T>>, Box<Node<T>>, Arc<str>),
    Call(Func, Box<Node<T>>, Arc<str>),
}

fn compile<T: Real>(e: &Expr, vars: &[String], params: &[(String, T)]) -> Result<Node<T>, ExprError> {
    let c = |x: &Expr| compile(x, vars, params).map(Box::new);
    Ok(match e {
        Expr::Num(x) => Node::Const(T::lit(*x)),
        Expr::Ident(name) => {
            if let Some(k) = vars.iter().position(|v| v == name) {
                Node::Var(k)
            } else if let Some((_, val)) = params.iter().find(|(p, _)| p == name) {
                Node::Const(*val)
            } else if is_constant_name(name) {
                Node::Const(if name == "pi" { T::PI() } else { T::E() })
            } else {
                return Err(ExprError::UnknownIdentifier(name.clone()));
            }
        }
        Expr::Neg(a) => match compile(a, vars, params)? {
            Node::Const(x) => Node::Const(-x),
            n => Node::Neg(Box::new(n)),
        },
        Expr::Binary(op, a, b) => {
            let text: Arc<str> = e.to_string().into();
            match op {
                BinOp::Add => Node::Add(c(a)?, c(b)?),
                BinOp::Sub => Node::Sub(c(a)?, c(b)?),
                BinOp::Mul => Node::Mul(c(a)?, c(b)?),
                BinOp::Div => Node::Div(c(a)?, c(b)?, text),
                BinOp::Pow => {
                    let base = c(a)?;
                    match compile(b, vars, params)? {
                        Node::Const(p) if p == p.round() && p.abs() <= T::lit(64.0) => {
                            Node::PowI(base, p.to_i32().unwrap_or(0))
                        }
                        Node::Const(p) => Node::PowF(base, p, text),
                        n => Node::PowGeneral(base, Box::new(n), text),
                    }
                }
            }
        }
        Expr::Call(f, a) => Node::Call(*f, c(a)?, e.to_string().into()),
    })
}

fn domain(what: &'static str, text: &Arc<str>) -> ExprError {
    ExprError::Domain {
        what,
        subexpr: text.to_string(),
    }
}

fn run<T: Real, S: Scalar<T>>(n: &Node<T>, x: &[S]) -> Result<S, ExprError> {
    Ok(match n {
        Node::Const(c) => S::from_real(*c),
        Node::Var(k) => x[*k],
        Node::Neg(a) => -run(a, x)?,
        Node::Add(a, b) => run(a, x)? + run(b, x)?,
        Node::Sub(a, b) => run(a, x)? - run(b, x)?,
        Node::Mul(a, b) => run(a, x)? * run(b, x)?,
        Node::Div(a, b, text) => {
            let d = run(b, x)?;
            if d.re() == T::zero() {
                return Err(domain("division by zero", text));
            }
            run(a, x)? / d
        }
        Node::PowI(a, k) => {
            let b = run(a, x)?;
            if *k < 0 && b.re() == T::zero() {
                return Err(ExprError::Domain {
                    what: "negative power of zero",
                    subexpr: format!("^{k}"),
                });
            }
            b.powi(*k)
        }
        Node::PowF(a, p, text) => {
            let b = run(a, x)?;
            if b.re() < T::zero() {
                return Err(domain("fractional power of a negative number", text));
            }
            b.powf(*p)
        }
        Node::PowGeneral(a, p, text) => {
            let b = run(a, x)?;
            let e = run(p, x)?;
            if b.re() <= T::zero() {
                return Err(domain("variable exponent needs a positive base", text));
            }
            (e * b.ln()).exp()
        }
        Node::Call(f, a, text) => {
            let v = run(a, x)?;
            match f {
                Func::Sin => v.sin(),
                Func::Cos => v.cos(),
                Func::Tan => {
                    if v.re().cos() == T::zero() {
                        return Err(domain("tangent pole", text));
                    }
                    v.tan()
                }
                Func::Exp => v.exp(),
                Func::Log => {
                    if v.re() <= T::zero() {
                        return Err(domain("logarithm of a non-positive number", text));
                    }
                    v.ln()
                }
                Func::Sqrt => {
                    if v.re() < T::zero() {
                        return Err(domain("square root of a negative number", text));
                    }
                    v.sqrt()
                }
                Func::Atan => v.atan(),
            }
        }
    })
}

/// Evaluates `expr` with the given bindings, returning its value and exact
/// partial derivatives up to `order` in the first (at most two) bindings.
/// Further bindings are treated as fixed constants.
pub fn evaluate<T: Real>(expr: &Expr, bindings: &[(&str, T)], order: usize) -> Result<Jet<T>, ExprError> {
    let nvars = bindings.len().min(2);
    let vars: Vec<String> = bindings[..nvars].iter().map(|(n, _)| n.to_string()).collect();
    let params: Vec<(String, T)> = bindings[nvars..].iter().map(|(n, v)| (n.to_string(), *v)).collect();
    let node = compile(expr, &vars, &params)?;
    if nvars == 0 {
        return run::<T, Jet<T>>(&node, &[]);
    }
    let x: Vec<Jet<T>> = bindings[..nvars]
        .iter()
        .enumerate()
        .map(|(k, (_, v))| Jet::variable(*v, k, nvars, order))
        .collect();
    run(&node, &x)
}

/// A named map from R^arity to R^dim given by component expressions.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "MapDefSpec", into = "MapDefSpec", bound = "T: Real")]
pub struct MapDef<T: Real> {
    name: String,
    vars: Vec<String>,
    params: Vec<(String, T)>,
    exprs: Vec<Expr>,
    nodes: Vec<Node<T>>,
}

/// Serialized form of a [`MapDef`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapDefSpec {
    pub name: String,
    pub vars: Vec<String>,
    #[serde(default)]
    pub params: Vec<(String, f64)>,
    pub components: Vec<String>,
}

impl<T: Real> TryFrom<MapDefSpec> for MapDef<T> {
    type Error = ExprError;
    fn try_from(s: MapDefSpec) -> Result<Self, ExprError> {
        let vars: Vec<&str> = s.vars.iter().map(String::as_str).collect();
        let comps: Vec<&str> = s.components.iter().map(String::as_str).collect();
        let params: Vec<(&str, T)> = s.params.iter().map(|(n, v)| (n.as_str(), T::lit(*v))).collect();
        MapDef::parse(&s.name, &vars, &comps, &params)
    }
}

impl<T: Real> From<MapDef<T>> for MapDefSpec {
    fn from(m: MapDef<T>) -> Self {
        MapDefSpec {
            name: m.name,
            vars: m.vars,
            params: m.params.into_iter().map(|(n, v)| (n, v.to_f64_lossy())).collect(),
            components: m.exprs.iter().map(|e| e.to_string()).collect(),
        }
    }
}

fn valid_ident(s: &str) -> bool {
    let mut ch = s.chars();
    matches!(ch.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && ch.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl<T: Real> MapDef<T> {
    pub fn parse(name: &str, vars: &[&str], components: &[&str], params: &[(&str, T)]) -> Result<Self, ExprError> {
        let exprs = components.iter().map(|c| parse(c)).collect::<Result<Vec<_>, _>>()?;
        Self::from_exprs(name, vars, exprs, params)
    }

    pub fn from_exprs(name: &str, vars: &[&str], exprs: Vec<Expr>, params: &[(&str, T)]) -> Result<Self, ExprError> {
        let bad = |msg: String| ExprError::BadMap {
            name: name.to_string(),
            msg,
        };
        if vars.is_empty() || vars.len() > 2 {
            return Err(bad(format!("{} variables; maps take one or two", vars.len())));
        }
        if exprs.is_empty() || exprs.len() > 3 {
            return Err(bad(format!("{} components; maps have one to three", exprs.len())));
        }
        let names: Vec<&str> = vars.iter().copied().chain(params.iter().map(|p| p.0)).collect();
        for (i, n) in names.iter().enumerate() {
            if !valid_ident(n) || is_constant_name(n) || Func::from_name(n).is_some() {
                return Err(bad(format!("`{n}` cannot be used as a name")));
            }
            if names[..i].contains(n) {
                return Err(bad(format!("`{n}` declared twice")));
            }
        }
        let vars: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        let params: Vec<(String, T)> = params.iter().map(|(n, v)| (n.to_string(), *v)).collect();
        let nodes = exprs
            .iter()
            .map(|e| compile(e, &vars, &params))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(MapDef {
            name: name.to_string(),
            vars,
            params,
            exprs,
            nodes,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn params(&self) -> &[(String, T)] {
        &self.params
    }

    pub fn components(&self) -> &[Expr] {
        &self.exprs
    }

    /// Evaluates every component on any scalar type.
    pub fn eval_scalar<S: Scalar<T>>(&self, x: &[S]) -> Result<Vec<S>, ExprError> {
        if x.len() != self.vars.len() {
            return Err(ExprError::Arity {
                expected: self.vars.len(),
                got: x.len(),
            });
        }
        self.nodes.iter().map(|n| run(n, x)).collect()
    }

    /// Evaluates a single component.
    pub fn eval_component<S: Scalar<T>>(&self, k: usize, x: &[S]) -> Result<S, ExprError> {
        run(&self.nodes[k], x)
    }
}

impl From<ExprError> for NumError {
    fn from(e: ExprError) -> Self {
        NumError::Domain(e.to_string())
    }
}

impl<T: Real> Evaluable<T> for MapDef<T> {
    fn arity(&self) -> usize {
        self.vars.len()
    }

    fn dim(&self) -> usize {
        self.nodes.len()
    }

    fn eval(&self, x: &[T]) -> Result<Vec<T>, NumError> {
        let out = self.eval_scalar(x)?;
        if out.iter().any(|v| !v.is_finite()) {
            return Err(NumError::NonFinite {
                at: x.first().map_or(0.0, |v| v.to_f64_lossy()),
            });
        }
        Ok(out)
    }

    fn eval_jet(&self, x: &[Jet<T>]) -> Option<Result<Vec<Jet<T>>, NumError>> {
        Some(self.eval_scalar(x).map_err(NumError::from))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::eval_jet;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn polynomial_value() {
        let e = parse("3*v^4+u*v^2").unwrap();
        let j = evaluate(&e, &[("u", 1.0), ("v", 2.0)], 0).unwrap();
        assert_eq!(j.value(), 52.0);
    }

    #[test]
    fn sine_derivative_at_zero() {
        let j = evaluate(&parse("sin(t)").unwrap(), &[("t", 0.0)], 1).unwrap();
        assert_eq!(j.value(), 0.0);
        assert_eq!(j.partial(1, 0), 1.0);
    }

    #[test]
    fn second_v_derivative() {
        let j = evaluate(&parse("u + v^2/2").unwrap(), &[("u", 0.0), ("v", 0.0)], 2).unwrap();
        assert_eq!(j.partial(0, 2), 1.0);
    }

    #[test]
    fn domain_errors_name_the_subexpression() {
        match evaluate(&parse("1/t").unwrap(), &[("t", 0.0)], 0) {
            Err(ExprError::Domain { subexpr, .. }) => assert_eq!(subexpr, "(1 / t)"),
            other => panic!("{other:?}"),
        }
        assert!(evaluate(&parse("log(t)").unwrap(), &[("t", -1.0)], 1).is_err());
        assert!(evaluate(&parse("sqrt(t)").unwrap(), &[("t", -1.0)], 1).is_err());
        assert!(evaluate(&parse("t^0.5").unwrap(), &[("t", -1.0)], 0).is_err());
    }

    #[test]
    fn parameters_and_constants_bind() {
        let m = MapDef::parse("m", &["u"], &["k*u + pi"], &[("k", 2.0)]).unwrap();
        assert_relative_eq!(m.eval(&[1.0]).unwrap()[0], 2.0 + std::f64::consts::PI);
        assert!(matches!(
            MapDef::<f64>::parse("m", &["u"], &["q*u"], &[]),
            Err(ExprError::UnknownIdentifier(_))
        ));
        assert!(MapDef::<f64>::parse("m", &["u", "u"], &["u"], &[]).is_err());
        assert!(MapDef::<f64>::parse("m", &["sin"], &["1"], &[]).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let m = MapDef::parse("cusp", &["t"], &["t^2", "t^3"], &[("a", 0.5)]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        let back: MapDef<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back.eval(&[0.7]).unwrap(), m.eval(&[0.7]).unwrap());
    }

    #[test]
    fn works_in_single_precision() {
        let m = MapDef::<f32>::parse("m", &["t"], &["t^3 - 2*t"], &[]).unwrap();
        let j = eval_jet(&m, &[2.0f32], 2).unwrap();
        assert_eq!(j[0].value(), 4.0);
        assert_eq!(j[0].partial(1, 0), 10.0);
        assert_eq!(j[0].partial(2, 0), 12.0);
    }

    const CATALOG: &[&str] = &[
        "v^2", "v^3", "u", "3*v^4+u*v^2", "4*v^3+2*u*v", "u*v^3", "u*v", "u^2+u*v^3",
        "u+v^2/2-u*v^2/2-v^4/8", "v^3/3+u*v", "u^2/2", "sin(u)*exp(v)", "atan(u-v)*cos(v)",
        "sqrt(2+u^2)*log(3+v)", "tan(u/3)+(1+v^2)^1.5",
    ];

    proptest! {
        #[test]
        fn forward_mode_matches_differences(u in -0.9f64..0.9, v in -0.9f64..0.9) {
            for src in CATALOG {
                let e = parse(src).unwrap();
                let j = evaluate(&e, &[("u", u), ("v", v)], 1).unwrap();
                let f = |a: f64, b: f64| evaluate(&e, &[("u", a), ("v", b)], 0).unwrap().value();
                let h = 1e-6;
                let du = (f(u + h, v) - f(u - h, v)) / (2.0 * h);
                let dv = (f(u, v + h) - f(u, v - h)) / (2.0 * h);
                let close = |a: f64, b: f64| (a - b).abs() <= 1e-6 * (1.0 + a.abs().max(b.abs()));
                prop_assert!(close(j.partial(1, 0), du), "{} d/du {} vs {}", src, j.partial(1, 0), du);
                prop_assert!(close(j.partial(0, 1), dv), "{} d/dv {} vs {}", src, j.partial(0, 1), dv);
            }
        }
    }
}
