//! Scalar expressions over chart coordinates.
//!
//! Metric components are written as small expression trees in the
//! coordinates `x0..x{m-1}` and named real parameters. Trees can be
//! evaluated either as plain floats ([`ScalarExpr::eval`]) or as order-3
//! Taylor jets ([`eval_jet`]), which is how the curvature engine obtains
//! the first three partial derivatives of the metric.

mod jet;
mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

pub use jet::{Jet3, MAX_ORDER};
pub use parse::parse_expr;

/// Late-bound parameter values, keyed by name.
pub type Params = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("coordinate x{index} out of range for dimension {dim}")]
    CoordinateOutOfRange { index: usize, dim: usize },
    #[error("parameter `{0}` is not bound")]
    UnboundParameter(String),
    #[error("point has dimension {got}, expected at least {expected}")]
    PointDimension { got: usize, expected: usize },
    #[error("division by zero")]
    DivisionByZero,
    #[error("non-finite value produced by `{0}`")]
    NonFinite(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScalarExpr {
    Const(f64),
    Coord(usize),
    Param(String),
    Add(Box<ScalarExpr>, Box<ScalarExpr>),
    Sub(Box<ScalarExpr>, Box<ScalarExpr>),
    Mul(Box<ScalarExpr>, Box<ScalarExpr>),
    Div(Box<ScalarExpr>, Box<ScalarExpr>),
    Neg(Box<ScalarExpr>),
    Pow(Box<ScalarExpr>, u32),
    Exp(Box<ScalarExpr>),
    Sin(Box<ScalarExpr>),
    Cos(Box<ScalarExpr>),
}

impl ScalarExpr {
    pub fn constant(c: f64) -> Self {
        ScalarExpr::Const(c)
    }

    pub fn coord(index: usize) -> Self {
        ScalarExpr::Coord(index)
    }

    pub fn param(name: impl Into<String>) -> Self {
        ScalarExpr::Param(name.into())
    }

    pub fn zero() -> Self {
        ScalarExpr::Const(0.0)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ScalarExpr::Const(c) if *c == 0.0)
    }

    pub fn powi(self, n: u32) -> Self {
        ScalarExpr::Pow(Box::new(self), n)
    }

    pub fn exp(self) -> Self {
        ScalarExpr::Exp(Box::new(self))
    }

    pub fn sin(self) -> Self {
        ScalarExpr::Sin(Box::new(self))
    }

    pub fn cos(self) -> Self {
        ScalarExpr::Cos(Box::new(self))
    }

    /// Largest coordinate index referenced, if any.
    pub fn max_coord(&self) -> Option<usize> {
        let mut out = None;
        self.visit(&mut |e| {
            if let ScalarExpr::Coord(i) = e {
                out = Some(out.map_or(*i, |m: usize| m.max(*i)));
            }
        });
        out
    }

    /// Set of coordinate indices referenced.
    pub fn coords(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let ScalarExpr::Coord(i) = e {
                out.insert(*i);
            }
        });
        out
    }

    /// Set of parameter names referenced.
    pub fn params(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let ScalarExpr::Param(p) = e {
                out.insert(p.clone());
            }
        });
        out
    }

    fn visit(&self, f: &mut impl FnMut(&ScalarExpr)) {
        f(self);
        match self {
            ScalarExpr::Const(_) | ScalarExpr::Coord(_) | ScalarExpr::Param(_) => {}
            ScalarExpr::Add(a, b)
            | ScalarExpr::Sub(a, b)
            | ScalarExpr::Mul(a, b)
            | ScalarExpr::Div(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            ScalarExpr::Neg(a)
            | ScalarExpr::Pow(a, _)
            | ScalarExpr::Exp(a)
            | ScalarExpr::Sin(a)
            | ScalarExpr::Cos(a) => a.visit(f),
        }
    }

    /// Plain floating-point evaluation. Independent of the jet code path.
    pub fn eval(&self, point: &[f64], params: &Params) -> Result<f64, ExprError> {
        let v = match self {
            ScalarExpr::Const(c) => *c,
            ScalarExpr::Coord(i) => *point.get(*i).ok_or(ExprError::PointDimension {
                got: point.len(),
                expected: i + 1,
            })?,
            ScalarExpr::Param(p) => *params
                .get(p)
                .ok_or_else(|| ExprError::UnboundParameter(p.clone()))?,
            ScalarExpr::Add(a, b) => a.eval(point, params)? + b.eval(point, params)?,
            ScalarExpr::Sub(a, b) => a.eval(point, params)? - b.eval(point, params)?,
            ScalarExpr::Mul(a, b) => a.eval(point, params)? * b.eval(point, params)?,
            ScalarExpr::Div(a, b) => {
                let num = a.eval(point, params)?;
                let den = b.eval(point, params)?;
                if den == 0.0 {
                    return Err(ExprError::DivisionByZero);
                }
                num / den
            }
            ScalarExpr::Neg(a) => -a.eval(point, params)?,
            ScalarExpr::Pow(a, n) => a.eval(point, params)?.powi(*n as i32),
            ScalarExpr::Exp(a) => a.eval(point, params)?.exp(),
            ScalarExpr::Sin(a) => a.eval(point, params)?.sin(),
            ScalarExpr::Cos(a) => a.eval(point, params)?.cos(),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ExprError::NonFinite(self.kind()))
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            ScalarExpr::Const(_) => "constant",
            ScalarExpr::Coord(_) => "coordinate",
            ScalarExpr::Param(_) => "parameter",
            ScalarExpr::Add(..) => "sum",
            ScalarExpr::Sub(..) => "difference",
            ScalarExpr::Mul(..) => "product",
            ScalarExpr::Div(..) => "quotient",
            ScalarExpr::Neg(_) => "negation",
            ScalarExpr::Pow(..) => "power",
            ScalarExpr::Exp(_) => "exp",
            ScalarExpr::Sin(_) => "sin",
            ScalarExpr::Cos(_) => "cos",
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            ScalarExpr::Add(..) | ScalarExpr::Sub(..) => 1,
            ScalarExpr::Mul(..) | ScalarExpr::Div(..) => 2,
            ScalarExpr::Neg(_) => 3,
            ScalarExpr::Pow(..) => 4,
            _ => 5,
        }
    }
}

/// Evaluate `e` at `p` as an order-3 jet: value, gradient, Hessian and third
/// derivatives with respect to all `p.len()` coordinates.
pub fn eval_jet(e: &ScalarExpr, p: &[f64], params: &Params) -> Result<Jet3, ExprError> {
    eval_jet_order(e, p, params, MAX_ORDER)
}

/// Like [`eval_jet`] but truncated at `order` (0..=3).
pub fn eval_jet_order(
    e: &ScalarExpr,
    p: &[f64],
    params: &Params,
    order: usize,
) -> Result<Jet3, ExprError> {
    let dim = p.len();
    let j = match e {
        ScalarExpr::Const(c) => Jet3::constant(dim, order, *c),
        ScalarExpr::Coord(i) => {
            if *i >= dim {
                return Err(ExprError::PointDimension { got: dim, expected: i + 1 });
            }
            Jet3::variable(dim, order, *i, p[*i])
        }
        ScalarExpr::Param(name) => {
            let v = *params
                .get(name)
                .ok_or_else(|| ExprError::UnboundParameter(name.clone()))?;
            Jet3::constant(dim, order, v)
        }
        ScalarExpr::Add(a, b) => {
            &eval_jet_order(a, p, params, order)? + &eval_jet_order(b, p, params, order)?
        }
        ScalarExpr::Sub(a, b) => {
            &eval_jet_order(a, p, params, order)? - &eval_jet_order(b, p, params, order)?
        }
        ScalarExpr::Mul(a, b) => {
            &eval_jet_order(a, p, params, order)? * &eval_jet_order(b, p, params, order)?
        }
        ScalarExpr::Div(a, b) => {
            let den = eval_jet_order(b, p, params, order)?;
            if den.value() == 0.0 {
                return Err(ExprError::DivisionByZero);
            }
            &eval_jet_order(a, p, params, order)? * &den.recip()
        }
        ScalarExpr::Neg(a) => -&eval_jet_order(a, p, params, order)?,
        ScalarExpr::Pow(a, n) => eval_jet_order(a, p, params, order)?.powi(*n),
        ScalarExpr::Exp(a) => eval_jet_order(a, p, params, order)?.exp(),
        ScalarExpr::Sin(a) => eval_jet_order(a, p, params, order)?.sin(),
        ScalarExpr::Cos(a) => eval_jet_order(a, p, params, order)?.cos(),
    };
    if j.is_finite() {
        Ok(j)
    } else {
        Err(ExprError::NonFinite(e.kind()))
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(f: &mut fmt::Formatter<'_>, e: &ScalarExpr, min_prec: u8) -> fmt::Result {
            if e.precedence() < min_prec {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            ScalarExpr::Const(c) => write!(f, "{c}"),
            ScalarExpr::Coord(i) => write!(f, "x{i}"),
            ScalarExpr::Param(p) => write!(f, "{p}"),
            ScalarExpr::Add(a, b) | ScalarExpr::Sub(a, b) => {
                child(f, a, 1)?;
                f.write_str(if matches!(self, ScalarExpr::Add(..)) { " + " } else { " - " })?;
                child(f, b, 2)
            }
            ScalarExpr::Mul(a, b) | ScalarExpr::Div(a, b) => {
                child(f, a, 2)?;
                f.write_str(if matches!(self, ScalarExpr::Mul(..)) { "*" } else { "/" })?;
                child(f, b, 3)
            }
            ScalarExpr::Neg(a) => {
                f.write_str("-")?;
                child(f, a, 3)
            }
            ScalarExpr::Pow(a, n) => {
                child(f, a, 4)?;
                write!(f, "^{n}")
            }
            ScalarExpr::Exp(a) => write!(f, "exp({a})"),
            ScalarExpr::Sin(a) => write!(f, "sin({a})"),
            ScalarExpr::Cos(a) => write!(f, "cos({a})"),
        }
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $variant:ident) => {
        impl std::ops::$tr for ScalarExpr {
            type Output = ScalarExpr;
            fn $method(self, rhs: ScalarExpr) -> ScalarExpr {
                ScalarExpr::$variant(Box::new(self), Box::new(rhs))
            }
        }
    };
}

binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);
binop!(Div, div, Div);

impl std::ops::Neg for ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        ScalarExpr::Neg(Box::new(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_params() -> Params {
        Params::new()
    }

    #[test]
    fn exp_jet_has_all_derivatives() {
        let e = parse_expr("exp(2*x0)", 1, &[]).unwrap();
        let j = eval_jet(&e, &[0.0], &no_params()).unwrap();
        assert_eq!(j.value(), 1.0);
        assert_eq!(j.d1(0), 2.0);
        assert_eq!(j.d2(0, 0), 4.0);
        assert_eq!(j.d3(0, 0, 0), 8.0);
    }

    #[test]
    fn polynomial_jet() {
        let e = parse_expr("x0^2 - x1^2", 2, &[]).unwrap();
        let j = eval_jet(&e, &[1.0, 2.0], &no_params()).unwrap();
        assert_eq!(j.value(), -3.0);
        assert_eq!((j.d1(0), j.d1(1)), (2.0, -4.0));
        assert_eq!((j.d2(0, 0), j.d2(1, 1), j.d2(0, 1)), (2.0, -2.0, 0.0));
        for (a, b, c) in [(0, 0, 0), (0, 0, 1), (0, 1, 1), (1, 1, 1)] {
            assert_eq!(j.d3(a, b, c), 0.0);
        }
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let e = parse_expr("1/(a + b*x2 + c*x3)", 4, &["a", "b", "c"]).unwrap();
        let params: Params = [("a", 1.0), ("b", 0.0), ("c", 1.0)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        let p = [0.0, 0.0, 0.0, -1.0];
        assert_eq!(e.eval(&p, &params), Err(ExprError::DivisionByZero));
        assert_eq!(eval_jet(&e, &p, &params).unwrap_err(), ExprError::DivisionByZero);
        assert!(eval_jet(&e, &[0.0, 0.0, 0.0, 1.0], &params).is_ok());
    }

    #[test]
    fn unbound_parameter() {
        let e = parse_expr("exp(b*x1)", 4, &["b"]).unwrap();
        assert_eq!(
            e.eval(&[0.0; 4], &no_params()),
            Err(ExprError::UnboundParameter("b".into()))
        );
    }

    #[test]
    fn zero_power_at_zero_base() {
        let e = ScalarExpr::coord(0).powi(0);
        let j = eval_jet(&e, &[0.0], &no_params()).unwrap();
        assert_eq!((j.value(), j.d1(0), j.d2(0, 0), j.d3(0, 0, 0)), (1.0, 0.0, 0.0, 0.0));
        let e = ScalarExpr::coord(0).powi(2);
        let j = eval_jet(&e, &[0.0], &no_params()).unwrap();
        assert_eq!((j.value(), j.d1(0), j.d2(0, 0), j.d3(0, 0, 0)), (0.0, 0.0, 2.0, 0.0));
    }

    #[test]
    fn printer_uses_minimal_parens() {
        let e = parse_expr("(x0 + x1)*x2 - -x3^2", 4, &[]).unwrap();
        assert_eq!(e.to_string(), "(x0 + x1)*x2 - -x3^2");
        let e = parse_expr("x0 - (x1 - x2)", 3, &[]).unwrap();
        assert_eq!(e.to_string(), "x0 - (x1 - x2)");
        let e = parse_expr("(-x0)^2", 1, &[]).unwrap();
        assert_eq!(e.to_string(), "(-x0)^2");
    }
}
