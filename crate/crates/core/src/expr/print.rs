use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::Expr;

// Binding strength: sums 1, products 2, negation 3, powers 4, atoms 5.
fn strength(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Neg(_) => 3,
        Expr::Pow(..) => 4,
        _ => 5,
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if strength(e) < min {
        write!(f, "(")?;
        write_expr(f, e)?;
        write!(f, ")")
    } else {
        write_expr(f, e)
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e {
        Expr::Const(c) => write!(f, "{}", decimal(c)),
        Expr::Var => write!(f, "x"),
        Expr::Param(p) => write!(f, "{p}"),
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            write_at(f, a, 1)?;
            write!(f, "{}", if matches!(e, Expr::Add(..)) { "+" } else { "-" })?;
            write_at(f, b, 2)
        }
        Expr::Mul(a, b) | Expr::Div(a, b) => {
            write_at(f, a, 2)?;
            write!(f, "{}", if matches!(e, Expr::Mul(..)) { "*" } else { "/" })?;
            write_at(f, b, 3)
        }
        Expr::Neg(a) => {
            write!(f, "-")?;
            write_at(f, a, 3)
        }
        Expr::Pow(a, b) => {
            write_at(f, a, 5)?;
            write!(f, "^")?;
            write_at(f, b, 3)
        }
        Expr::Exp(a) => {
            write!(f, "exp(")?;
            write_expr(f, a)?;
            write!(f, ")")
        }
        Expr::Ln(a) => {
            write!(f, "ln(")?;
            write_expr(f, a)?;
            write!(f, ")")
        }
    }
}

/// Exact plain decimal when the denominator has only factors 2 and 5,
/// which holds for every literal the parser produces and every `f64`.
/// Other rationals print as a parenthesized quotient.
fn decimal(c: &BigRational) -> String {
    let (num, den) = (c.numer().clone(), c.denom().clone());
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut d, mut twos, mut fives) = (den.clone(), 0u32, 0u32);
    while d.is_even() && !d.is_zero() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    if !d.is_one() {
        return format!("({num}/{den})");
    }
    let k = twos.max(fives);
    if k == 0 {
        return num.to_string();
    }
    // num/den = num * 10^k / den / 10^k with an integer numerator
    let scaled = num * num_traits::pow(BigInt::from(10), k as usize) / den;
    let digits = scaled.to_string();
    let k = k as usize;
    let padded = if digits.len() <= k {
        format!("{}{}", "0".repeat(k + 1 - digits.len()), digits)
    } else {
        digits
    };
    let (int, frac) = padded.split_at(padded.len() - k);
    let frac = frac.trim_end_matches('0');
    if frac.is_empty() {
        int.to_string()
    } else {
        format!("{int}.{frac}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self)
    }
}
