//! Extended-precision real numbers.
//!
//! [`Real`] wraps an `astro_float::BigFloat` together with its working
//! precision. Binary operations run at the larger precision of the two
//! operands and round to nearest-even. Transcendental functions draw on a
//! per-thread constants cache, so values can be shared freely across rayon
//! workers.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_bigint::BigInt;
use num_rational::BigRational;

/// Default working precision in bits.
pub const DEFAULT_PRECISION: usize = 256;
/// Smallest precision accepted anywhere in the crate.
pub const MIN_PRECISION: usize = 64;

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|cc| f(&mut cc.borrow_mut()))
}

#[derive(Clone)]
pub struct Real {
    v: BigFloat,
    prec: usize,
}

fn mk(v: BigFloat, prec: usize) -> Real {
    Real { v, prec }
}

impl Real {
    pub fn zero(prec: usize) -> Real {
        Real::from_i64(0, prec)
    }

    pub fn one(prec: usize) -> Real {
        Real::from_i64(1, prec)
    }

    pub fn from_i64(v: i64, prec: usize) -> Real {
        mk(BigFloat::from_i64(v, prec), prec)
    }

    /// Exact for every finite `f64` since `prec >= 64`.
    pub fn from_f64(v: f64, prec: usize) -> Real {
        mk(BigFloat::from_f64(v, prec), prec)
    }

    pub fn from_bigint(v: &BigInt, prec: usize) -> Real {
        let s = v.to_string();
        mk(with_consts(|cc| BigFloat::parse(&s, Radix::Dec, prec, RM, cc)), prec)
    }

    pub fn from_rational(v: &BigRational, prec: usize) -> Real {
        let n = Real::from_bigint(v.numer(), prec + 64);
        let d = Real::from_bigint(v.denom(), prec + 64);
        (&n / &d).with_precision(prec)
    }

    /// `10^k` for small integer `k`.
    pub fn pow10(k: i32, prec: usize) -> Real {
        let ten = Real::from_i64(10, prec);
        let p = ten.powi(k.unsigned_abs() as u64);
        if k >= 0 {
            p
        } else {
            &Real::one(prec) / &p
        }
    }

    pub fn pi(prec: usize) -> Real {
        mk(with_consts(|cc| cc.pi(prec, RM)), prec)
    }

    pub fn precision(&self) -> usize {
        self.prec
    }

    pub fn with_precision(&self, prec: usize) -> Real {
        let mut v = self.v.clone();
        // Rounding an existing finite value can only fail on invalid precision.
        let _ = v.set_precision(prec, RM);
        mk(v, prec)
    }

    pub fn is_finite(&self) -> bool {
        !self.v.is_nan() && !self.v.is_inf()
    }

    pub fn is_zero(&self) -> bool {
        self.v.is_zero()
    }

    /// Strictly greater than zero.
    pub fn is_positive(&self) -> bool {
        !self.v.is_zero() && self.v.is_positive() && !self.v.is_nan()
    }

    /// Strictly less than zero.
    pub fn is_negative(&self) -> bool {
        !self.v.is_zero() && self.v.is_negative() && !self.v.is_nan()
    }

    pub fn is_integer(&self) -> bool {
        self.is_finite() && self.v.is_int()
    }

    /// Integer value if `self` is an integer that fits in an `i64`.
    pub fn to_i64(&self) -> Option<i64> {
        if !self.is_integer() {
            return None;
        }
        let f = self.to_f64();
        if f.abs() < 9.0e15 {
            Some(f as i64)
        } else {
            None
        }
    }

    pub fn abs(&self) -> Real {
        mk(self.v.abs(), self.prec)
    }

    pub fn exp(&self) -> Real {
        let p = self.precision();
        mk(with_consts(|cc| self.v.exp(p, RM, cc)), p)
    }

    /// Natural logarithm. The caller guarantees `self > 0`.
    pub fn ln(&self) -> Real {
        let p = self.precision();
        mk(with_consts(|cc| self.v.ln(p, RM, cc)), p)
    }

    pub fn sqrt(&self) -> Real {
        mk(self.v.sqrt(self.prec, RM), self.prec)
    }

    /// `self^v` for real `v`, computed as `exp(v ln self)`; requires `self > 0`.
    pub fn powf(&self, v: &Real) -> Real {
        (&self.ln() * v).exp()
    }

    pub fn powi(&self, n: u64) -> Real {
        mk(self.v.powi(n as usize, self.prec, RM), self.prec)
    }

    pub fn max(a: &Real, b: &Real) -> Real {
        if a >= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    /// `2^k` at the given precision.
    pub fn pow2(k: i32, prec: usize) -> Real {
        let two = Real::from_i64(2, prec);
        let p = two.powi(k.unsigned_abs() as u64);
        if k >= 0 {
            p
        } else {
            &Real::one(prec) / &p
        }
    }

    /// Nearest `f64`, saturating to infinities outside the `f64` range.
    pub fn to_f64(&self) -> f64 {
        if self.v.is_nan() {
            return f64::NAN;
        }
        if self.v.is_inf() {
            return if self.v.is_inf_pos() {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            };
        }
        if self.v.is_zero() {
            return 0.0;
        }
        let (words, _, sign, exp, _) = match self.v.as_raw_parts() {
            Some(p) => p,
            None => return f64::NAN,
        };
        // value = 0.m * 2^exp, most significant word last
        let top = words.last().copied().unwrap_or(0);
        let next = if words.len() > 1 {
            words[words.len() - 2]
        } else {
            0
        };
        let hi = top as f64 + (next as f64) / 18446744073709551616.0;
        let e = exp as i64 - 64;
        let mag = if e > 1100 {
            f64::INFINITY
        } else if e < -1200 {
            0.0
        } else {
            let h = (e / 2) as i32;
            hi * 2f64.powi(h) * 2f64.powi(e as i32 - h)
        };
        if sign == Sign::Neg {
            -mag
        } else {
            mag
        }
    }

    /// Decimal rendering with `digits` significant digits.
    pub fn to_string_digits(&self, digits: usize) -> String {
        if !self.is_finite() {
            return format!("{}", self.to_f64());
        }
        if self.is_zero() {
            return "0".to_string();
        }
        let bits = ((digits as f64) * std::f64::consts::LOG2_10).ceil() as usize + 8;
        let r = self.with_precision(bits.max(MIN_PRECISION));
        with_consts(|cc| r.v.format(Radix::Dec, RM, cc)).unwrap_or_else(|_| self.to_f64().to_string())
    }

    /// Sign as -1, 0 or 1.
    pub fn signum(&self) -> i32 {
        if self.is_zero() {
            0
        } else if self.is_negative() {
            -1
        } else {
            1
        }
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Real({})", self.to_string_digits(30))
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Real) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Real) -> Option<Ordering> {
        self.v.cmp(&other.v).map(|c| c.cmp(&0))
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $call:ident) => {
        impl<'a> $tr<&'a Real> for &'a Real {
            type Output = Real;
            fn $method(self, rhs: &'a Real) -> Real {
                let p = self.precision().max(rhs.precision());
                mk(self.v.$call(&rhs.v, p, RM), p)
            }
        }
        impl $tr<Real> for Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $tr<&'a Real> for Real {
            type Output = Real;
            fn $method(self, rhs: &'a Real) -> Real {
                (&self).$method(rhs)
            }
        }
        impl<'a> $tr<Real> for &'a Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);
binop!(Div, div, div);

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        mk(self.v.neg(), self.prec)
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        mk(self.v.clone().neg(), self.prec)
    }
}

/// Relative difference `|a-b| / max(|a|,|b|)`, or the absolute difference
/// when both are zero-ish.
pub fn rel_diff(a: &Real, b: &Real) -> f64 {
    let d = (a - b).abs();
    let s = Real::max(&a.abs(), &b.abs());
    if s.is_zero() {
        d.to_f64()
    } else {
        (&d / &s).to_f64()
    }
}
