//! Truncated Taylor arithmetic.
//!
//! A [`Jet`] holds the scaled Taylor coefficients `c_k = f^(k)(x0) / k!`
//! of a function at `x0` for `k = 0..=N`. Arithmetic on jets propagates
//! all derivatives through order `N` at once, so lifting an [`Expr`]
//! yields exact-to-precision derivatives without any step size.

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{Error, Result};
use crate::expr::{Binding, Expr};
use crate::expr::eval::{integer_exponent, powi_real};
use crate::real::Real;

/// Highest derivative order accepted by [`lift`].
pub const N_MAX: usize = 16;

#[derive(Debug, Clone)]
pub struct Jet {
    x0: Real,
    coeffs: Vec<Real>,
    precision: usize,
}

impl Jet {
    pub fn constant(v: &Real, x0: &Real, order: usize, precision: usize) -> Jet {
        let mut coeffs = vec![Real::zero(precision); order + 1];
        coeffs[0] = v.with_precision(precision);
        Jet { x0: x0.with_precision(precision), coeffs, precision }
    }

    /// The identity function `x` expanded at `x0`.
    pub fn variable(x0: &Real, order: usize, precision: usize) -> Jet {
        let mut j = Jet::constant(x0, x0, order, precision);
        if order >= 1 {
            j.coeffs[1] = Real::one(precision);
        }
        j
    }

    /// Jet from raw scaled coefficients.
    pub fn from_coeffs(x0: &Real, coeffs: Vec<Real>, precision: usize) -> Result<Jet> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter("a jet needs at least one coefficient".into()));
        }
        let coeffs = coeffs.into_iter().map(|c| c.with_precision(precision)).collect();
        Ok(Jet { x0: x0.with_precision(precision), coeffs, precision })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    pub fn x0(&self) -> &Real {
        &self.x0
    }

    pub fn coeffs(&self) -> &[Real] {
        &self.coeffs
    }

    pub fn value(&self) -> &Real {
        &self.coeffs[0]
    }

    fn zero(&self) -> Real {
        Real::zero(self.precision)
    }

    fn check(&self, other: &Jet) -> Result<()> {
        if self.order() != other.order()
            || self.precision != other.precision
            || self.x0 != other.x0
        {
            return Err(Error::MismatchedJets);
        }
        Ok(())
    }

    fn with_coeffs(&self, coeffs: Vec<Real>) -> Jet {
        Jet { x0: self.x0.clone(), coeffs, precision: self.precision }
    }

    pub fn add(&self, other: &Jet) -> Result<Jet> {
        self.check(other)?;
        Ok(self.with_coeffs(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect()))
    }

    pub fn sub(&self, other: &Jet) -> Result<Jet> {
        self.check(other)?;
        Ok(self.with_coeffs(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect()))
    }

    pub fn neg(&self) -> Jet {
        self.with_coeffs(self.coeffs.iter().map(|a| -a).collect())
    }

    pub fn scale(&self, s: &Real) -> Jet {
        self.with_coeffs(self.coeffs.iter().map(|a| a * s).collect())
    }

    /// Cauchy product truncated at the common order.
    pub fn mul(&self, other: &Jet) -> Result<Jet> {
        self.check(other)?;
        let n = self.order();
        let mut out = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let mut s = self.zero();
            for j in 0..=k {
                s = s + &self.coeffs[j] * &other.coeffs[k - j];
            }
            out.push(s);
        }
        Ok(self.with_coeffs(out))
    }

    /// Fails with `NearSingular` when `|other.c_0| < 2^(-precision/2)`.
    pub fn div(&self, other: &Jet) -> Result<Jet> {
        self.check(other)?;
        let b0 = &other.coeffs[0];
        let threshold = Real::pow2(-((self.precision / 2) as i32), self.precision);
        if b0.abs() < threshold {
            return Err(Error::NearSingular(b0.to_f64()));
        }
        let n = self.order();
        let mut q: Vec<Real> = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let mut s = self.coeffs[k].clone();
            for j in 1..=k {
                s = s - &other.coeffs[j] * &q[k - j];
            }
            q.push(&s / b0);
        }
        Ok(self.with_coeffs(q))
    }

    /// `b_0 = e^(a_0)`, `k b_k = sum_{j=1..k} j a_j b_(k-j)`.
    pub fn exp(&self) -> Jet {
        let n = self.order();
        let mut b: Vec<Real> = Vec::with_capacity(n + 1);
        b.push(self.coeffs[0].exp());
        for k in 1..=n {
            let mut s = self.zero();
            for j in 1..=k {
                let ja = &self.coeffs[j] * &Real::from_i64(j as i64, self.precision);
                s = s + &ja * &b[k - j];
            }
            b.push(&s / &Real::from_i64(k as i64, self.precision));
        }
        self.with_coeffs(b)
    }

    /// `b_0 = ln a_0`, `k a_0 b_k = k a_k - sum_{j=1..k-1} j b_j a_(k-j)`.
    pub fn ln(&self) -> Result<Jet> {
        let a0 = &self.coeffs[0];
        if !a0.is_positive() {
            return Err(Error::Domain(format!("ln of nonpositive value {}", a0.to_f64())));
        }
        let n = self.order();
        let mut b: Vec<Real> = Vec::with_capacity(n + 1);
        b.push(a0.ln());
        for k in 1..=n {
            let kr = Real::from_i64(k as i64, self.precision);
            let mut s = &kr * &self.coeffs[k];
            for j in 1..k {
                let jb = &b[j] * &Real::from_i64(j as i64, self.precision);
                s = s - &jb * &self.coeffs[k - j];
            }
            b.push(&s / &(&kr * a0));
        }
        Ok(self.with_coeffs(b))
    }

    /// Integer power by repeated squaring; negative powers go through
    /// [`Jet::div`].
    pub fn powi(&self, n: i64) -> Result<Jet> {
        if self.coeffs[0].is_zero() && n <= 0 {
            return Err(Error::Domain("zero base with nonpositive exponent".into()));
        }
        let one = Jet::constant(&Real::one(self.precision), &self.x0, self.order(), self.precision);
        let mut result = one.clone();
        let mut base = self.clone();
        let mut e = n.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        if n < 0 {
            one.div(&result)
        } else {
            Ok(result)
        }
    }

    /// `a^v` for a real constant `v`; integers use [`Jet::powi`], anything
    /// else `exp(v ln a)` and requires `a_0 > 0`.
    pub fn pow_real(&self, v: &Real) -> Result<Jet> {
        if let Some(n) = v.to_i64() {
            return self.powi(n);
        }
        Ok(self.ln()?.scale(v).exp())
    }

    /// `(d_0..d_N)` with `d_k = k! c_k`.
    pub fn derivatives(&self) -> Vec<Real> {
        let mut fact = BigUint::one();
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                if k > 0 {
                    fact *= k as u64;
                }
                c * &Real::from_bigint(&fact.clone().into(), self.precision)
            })
            .collect()
    }
}

/// Taylor jet of `e` at `x0` through order `n`, at the binding's precision.
pub fn lift(e: &Expr, x0: &Real, n: usize, b: &Binding) -> Result<Jet> {
    lift_capped(e, x0, n, b, N_MAX)
}

pub fn lift_capped(e: &Expr, x0: &Real, n: usize, b: &Binding, cap: usize) -> Result<Jet> {
    if n > cap {
        return Err(Error::OrderTooLarge { order: n, cap });
    }
    b.check_covers(e)?;
    let prec = b.precision();
    let x0 = x0.with_precision(prec);
    lift_rec(e, &x0, n, b)
}

fn lift_rec(e: &Expr, x0: &Real, n: usize, b: &Binding) -> Result<Jet> {
    let prec = b.precision();
    let constant = |v: Real| Jet::constant(&v, x0, n, prec);
    Ok(match e {
        Expr::Var => Jet::variable(x0, n, prec),
        Expr::Const(_) | Expr::Param(_) => constant(crate::expr::eval(e, x0, b)?),
        Expr::Add(l, r) => lift_rec(l, x0, n, b)?.add(&lift_rec(r, x0, n, b)?)?,
        Expr::Sub(l, r) => lift_rec(l, x0, n, b)?.sub(&lift_rec(r, x0, n, b)?)?,
        Expr::Mul(l, r) => lift_rec(l, x0, n, b)?.mul(&lift_rec(r, x0, n, b)?)?,
        Expr::Div(l, r) => {
            let d = lift_rec(r, x0, n, b)?;
            if d.value().is_zero() {
                return Err(Error::DivisionByZero);
            }
            lift_rec(l, x0, n, b)?.div(&d)?
        }
        Expr::Neg(a) => lift_rec(a, x0, n, b)?.neg(),
        Expr::Exp(a) => lift_rec(a, x0, n, b)?.exp(),
        Expr::Ln(a) => lift_rec(a, x0, n, b)?.ln()?,
        Expr::Pow(base, exponent) => {
            let u = lift_rec(base, x0, n, b)?;
            if !exponent.depends_on_x() {
                let v = crate::expr::eval(exponent, x0, b)?;
                if let Some(k) = integer_exponent(exponent, &v) {
                    // keeps value-level semantics identical to `eval`
                    powi_real(u.value(), k)?;
                    return u.powi(k);
                }
                check_real_power_base(u.value(), &v)?;
                return u.pow_real(&v);
            }
            let v = lift_rec(exponent, x0, n, b)?;
            check_real_power_base(u.value(), v.value())?;
            u.ln()?.mul(&v)?.exp()
        }
    })
}

fn check_real_power_base(u0: &Real, v0: &Real) -> Result<()> {
    if u0.is_zero() && !v0.is_positive() {
        return Err(Error::Domain("zero base with nonpositive exponent".into()));
    }
    if !u0.is_positive() {
        return Err(Error::Domain(format!(
            "nonpositive base {} with non-integer exponent",
            u0.to_f64()
        )));
    }
    Ok(())
}
