use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::{Binding, Expr};
use crate::error::{Error, Result};
use crate::real::Real;

/// Integer exponents up to this size use repeated multiplication.
pub(crate) const MAX_INT_EXPONENT: i64 = 1 << 20;

/// Exponent treated as an integer power: it does not involve `x` and its
/// value is an integer of moderate size. Everything else goes through
/// `exp(v ln u)` and needs a positive base.
pub(crate) fn integer_exponent(exponent: &Expr, value: &Real) -> Option<i64> {
    if exponent.depends_on_x() {
        return None;
    }
    value.to_i64().filter(|n| n.abs() <= MAX_INT_EXPONENT)
}

pub(crate) fn powi_real(base: &Real, n: i64) -> Result<Real> {
    if base.is_zero() && n <= 0 {
        return Err(Error::Domain("zero base with nonpositive exponent".into()));
    }
    let p = base.powi(n.unsigned_abs());
    Ok(if n < 0 { &Real::one(base.precision()) / &p } else { p })
}

/// Value of `e` at `x`, at the binding's precision.
pub fn eval(e: &Expr, x: &Real, b: &Binding) -> Result<Real> {
    let prec = b.precision();
    let x = x.with_precision(prec);
    eval_at(e, &x, b)
}

fn eval_at(e: &Expr, x: &Real, b: &Binding) -> Result<Real> {
    let prec = b.precision();
    Ok(match e {
        Expr::Const(c) => {
            if c.is_integer() {
                if let Some(v) = c.numer().to_i64() {
                    return Ok(Real::from_i64(v, prec));
                }
                return Ok(Real::from_bigint(&BigInt::clone(c.numer()), prec));
            }
            Real::from_rational(c, prec)
        }
        Expr::Var => x.clone(),
        Expr::Param(p) => b
            .get(p)
            .cloned()
            .ok_or_else(|| Error::UnboundParameter(p.clone()))?,
        Expr::Add(l, r) => eval_at(l, x, b)? + eval_at(r, x, b)?,
        Expr::Sub(l, r) => eval_at(l, x, b)? - eval_at(r, x, b)?,
        Expr::Mul(l, r) => eval_at(l, x, b)? * eval_at(r, x, b)?,
        Expr::Div(l, r) => {
            let d = eval_at(r, x, b)?;
            if d.is_zero() {
                return Err(Error::DivisionByZero);
            }
            eval_at(l, x, b)? / d
        }
        Expr::Neg(a) => -eval_at(a, x, b)?,
        Expr::Exp(a) => eval_at(a, x, b)?.exp(),
        Expr::Ln(a) => {
            let v = eval_at(a, x, b)?;
            if !v.is_positive() {
                return Err(Error::Domain(format!("ln of nonpositive value {}", v.to_f64())));
            }
            v.ln()
        }
        Expr::Pow(base, exponent) => {
            let u = eval_at(base, x, b)?;
            let v = eval_at(exponent, x, b)?;
            if let Some(n) = integer_exponent(exponent, &v) {
                return powi_real(&u, n);
            }
            if u.is_zero() && !v.is_positive() {
                return Err(Error::Domain("zero base with nonpositive exponent".into()));
            }
            if !u.is_positive() {
                return Err(Error::Domain(format!(
                    "nonpositive base {} with non-integer exponent",
                    u.to_f64()
                )));
            }
            u.powf(&v)
        }
    })
}
