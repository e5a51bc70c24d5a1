//! Open intervals with possibly infinite endpoints.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Open interval `(lo, hi)`; `f64::NEG_INFINITY` / `f64::INFINITY` mark
/// unbounded ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    #[serde(with = "endpoint")]
    pub lo: f64,
    #[serde(with = "endpoint")]
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Interval, Error> {
        if lo.is_nan() || hi.is_nan() || lo >= hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY
        {
            return Err(Error::Config(format!("empty interval ({lo},{hi})")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn positive_half_line() -> Interval {
        Interval { lo: 0.0, hi: f64::INFINITY }
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }
}

fn fmt_endpoint(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

fn parse_endpoint(s: &str) -> Result<f64, Error> {
    match s.trim() {
        "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
        "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
        t => t
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::Config(format!("bad interval endpoint `{t}`"))),
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", fmt_endpoint(self.lo), fmt_endpoint(self.hi))
    }
}

impl FromStr for Interval {
    type Err = Error;

    /// Accepts `"(lo,hi)"` with `inf` / `-inf` for unbounded ends.
    fn from_str(s: &str) -> Result<Interval, Error> {
        let t = s.trim();
        let inner = t
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| Error::Config(format!("interval must look like (lo,hi): `{s}`")))?;
        let (lo, hi) = inner
            .split_once(',')
            .ok_or_else(|| Error::Config(format!("interval needs two endpoints: `{s}`")))?;
        Interval::new(parse_endpoint(lo)?, parse_endpoint(hi)?)
    }
}

/// Infinite endpoints serialize as the strings `"inf"` / `"-inf"`.
mod endpoint {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str(&super::fmt_endpoint(*v))
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Str(s) => super::parse_endpoint(&s).map_err(de::Error::custom),
        }
    }
}
