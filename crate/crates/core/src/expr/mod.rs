//! Expressions in one variable `x` with named real parameters.
//!
//! Grammar (EBNF), whitespace ignored between tokens:
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = "-" unary | power ;
//! power   = primary [ "^" unary ] ;
//! primary = number | "x" | ident | ("exp" | "ln") "(" expr ")" | "(" expr ")" ;
//! number  = digit { digit } [ "." digit { digit } ] [ ("e" | "E") [ "+" | "-" ] digit { digit } ] ;
//! ident   = letter { letter | digit | "_" } ;   (* any name except x, exp, ln *)
//! ```
//!
//! `+ - * /` associate to the left and `^` to the right, so `-x^2` is
//! `-(x^2)` and `a^b^c` is `a^(b^c)`. There is no implicit multiplication.

pub(crate) mod eval;
mod parse;
mod print;

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

pub use eval::eval;
pub use parse::{parse, ParseError};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::real::{Real, MIN_PRECISION};

/// Name of the single free variable.
pub const VARIABLE: &str = "x";

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// Nonnegative rational literal; negative values are `Neg(Const)`.
    Const(BigRational),
    Var,
    Param(String),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Exp(Box<Expr>),
    Ln(Box<Expr>),
}

impl Expr {
    pub fn int(v: i64) -> Expr {
        Expr::constant(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn constant(v: BigRational) -> Expr {
        if v.is_negative() {
            Expr::Neg(Box::new(Expr::Const(-v)))
        } else {
            Expr::Const(v)
        }
    }

    /// Exact rational value of a finite `f64`.
    pub fn from_f64(v: f64) -> Result<Expr> {
        BigRational::from_float(v)
            .map(Expr::constant)
            .ok_or_else(|| Error::InvalidParameter(format!("non-finite constant {v}")))
    }

    pub fn param(name: &str) -> Expr {
        Expr::Param(name.to_string())
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::Div(Box::new(a), Box::new(b))
    }

    pub fn neg(a: Expr) -> Expr {
        Expr::Neg(Box::new(a))
    }

    pub fn pow(a: Expr, b: Expr) -> Expr {
        Expr::Pow(Box::new(a), Box::new(b))
    }

    pub fn exp(a: Expr) -> Expr {
        Expr::Exp(Box::new(a))
    }

    pub fn ln(a: Expr) -> Expr {
        Expr::Ln(Box::new(a))
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Const(_) | Expr::Var | Expr::Param(_) => vec![],
            Expr::Neg(a) | Expr::Exp(a) | Expr::Ln(a) => vec![a],
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => vec![a, b],
        }
    }

    /// Parameter names in sorted order.
    pub fn params(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_params(&mut out);
        out
    }

    fn collect_params(&self, out: &mut BTreeSet<String>) {
        if let Expr::Param(p) = self {
            out.insert(p.clone());
        }
        for c in self.children() {
            c.collect_params(out);
        }
    }

    pub fn depends_on_x(&self) -> bool {
        matches!(self, Expr::Var) || self.children().iter().any(|c| c.depends_on_x())
    }

    pub fn is_zero_const(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }
}

/// Parameter values plus the working precision used by evaluation.
#[derive(Debug, Clone)]
pub struct Binding {
    values: BTreeMap<String, Real>,
    precision: usize,
}

impl Binding {
    pub fn new(precision: usize) -> Result<Binding> {
        if precision < MIN_PRECISION {
            return Err(Error::InvalidParameter(format!(
                "precision {precision} is below {MIN_PRECISION} bits"
            )));
        }
        Ok(Binding { values: BTreeMap::new(), precision })
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    pub fn set(&mut self, name: &str, value: Real) {
        self.values.insert(name.to_string(), value.with_precision(self.precision));
    }

    pub fn with(mut self, name: &str, value: Real) -> Binding {
        self.set(name, value);
        self
    }

    pub fn with_f64(self, name: &str, value: f64) -> Binding {
        let p = self.precision;
        self.with(name, Real::from_f64(value, p))
    }

    pub fn get(&self, name: &str) -> Option<&Real> {
        self.values.get(name)
    }

    /// Same values re-rounded at another precision.
    pub fn at_precision(&self, precision: usize) -> Binding {
        Binding {
            values: self
                .values
                .iter()
                .map(|(k, v)| (k.clone(), v.with_precision(precision)))
                .collect(),
            precision,
        }
    }

    /// Fails with `UnboundParameter` naming the first missing parameter.
    pub fn check_covers(&self, e: &Expr) -> Result<()> {
        match e.params().into_iter().find(|p| !self.values.contains_key(p)) {
            Some(p) => Err(Error::UnboundParameter(p)),
            None => Ok(()),
        }
    }
}

/// `(1 + a/x)^(x + b)` (or its reciprocal) with its parameter binding and
/// the two open intervals where the base is positive.
#[derive(Debug, Clone)]
pub struct FFunction {
    pub expr: Expr,
    pub binding: Binding,
    /// `(max{0,-alpha}, inf)`
    pub right: Interval,
    /// `(-inf, min{0,-alpha})`
    pub left: Interval,
}

/// Builds `(1+alpha/x)^(x+beta)`, or `(1+alpha/x)^-(x+beta)` when
/// `reciprocal` is set. Parameters are named `a` and `b`.
pub fn make_f(alpha: &Real, beta: &Real, reciprocal: bool, precision: usize) -> Result<FFunction> {
    if alpha.is_zero() {
        return Err(Error::InvalidParameter("alpha must be nonzero".into()));
    }
    let base = Expr::add(Expr::int(1), Expr::div(Expr::param("a"), Expr::Var));
    let exponent = Expr::add(Expr::Var, Expr::param("b"));
    let exponent = if reciprocal { Expr::neg(exponent) } else { exponent };
    let binding = Binding::new(precision)?
        .with("a", alpha.clone())
        .with("b", beta.clone());
    let a = alpha.to_f64();
    Ok(FFunction {
        expr: Expr::pow(base, exponent),
        binding,
        right: Interval { lo: 0f64.max(-a), hi: f64::INFINITY },
        left: Interval { lo: f64::NEG_INFINITY, hi: 0f64.min(-a) },
    })
}
