//! Numerical membership tests for the classes CM, AM, LCM and LAM.
//!
//! A class test evaluates the class's sign rule at every grid point and
//! every order up to `max_order`, using jets of `f` (CM, AM) or of `ln f`
//! (LCM, LAM). A `Consistent` verdict is evidence gathered on finitely
//! many points and orders, not a proof. A `Refuted` verdict carries a
//! witness that survived re-evaluation at twice the working precision.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bruno::{exp_of_log, signed_terms};
use crate::error::{Error, Result};
use crate::expr::{Binding, Expr};
use crate::interval::Interval;
use crate::jets::{lift, N_MAX};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassSpec {
    /// `(-1)^k f^(k) >= 0`, `k >= 0`
    Cm,
    /// `f^(k) >= 0`, `k >= 0`
    Am,
    /// `(-1)^k [ln f]^(k) >= 0`, `k >= 1`
    Lcm,
    /// `[ln f]^(k) >= 0`, `k >= 1`
    Lam,
}

impl ClassSpec {
    pub fn is_logarithmic(self) -> bool {
        matches!(self, ClassSpec::Lcm | ClassSpec::Lam)
    }

    pub fn alternating(self) -> bool {
        matches!(self, ClassSpec::Cm | ClassSpec::Lcm)
    }

    pub fn first_order(self) -> usize {
        if self.is_logarithmic() {
            1
        } else {
            0
        }
    }

    /// The quantity the rule requires to be nonnegative at order `k`.
    pub fn signed(self, k: usize, v: &Real) -> Real {
        if self.alternating() && k % 2 == 1 {
            -v
        } else {
            v.clone()
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ClassSpec::Cm => "cm",
            ClassSpec::Am => "am",
            ClassSpec::Lcm => "lcm",
            ClassSpec::Lam => "lam",
        }
    }
}

impl std::str::FromStr for ClassSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<ClassSpec> {
        match s.to_ascii_lowercase().as_str() {
            "cm" => Ok(ClassSpec::Cm),
            "am" => Ok(ClassSpec::Am),
            "lcm" => Ok(ClassSpec::Lcm),
            "lam" => Ok(ClassSpec::Lam),
            _ => Err(Error::Config(format!("unknown class `{s}` (cm, am, lcm, lam)"))),
        }
    }
}

/// Exponents `j` of the standard offsets `10^j` from a finite endpoint.
pub const STANDARD_EXPONENTS: [i32; 9] = [-6, -4, -2, -1, 0, 1, 2, 4, 6];

#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    /// Log-spaced offsets `10^j`, `j` in [`STANDARD_EXPONENTS`].
    Standard,
    /// Log-spaced offsets with custom exponents.
    Exponents(Vec<i32>),
    /// Explicit sample points; each must lie inside the interval.
    Points(Vec<f64>),
}

impl GridSpec {
    /// Sample points in ascending `j` order.
    ///
    /// `(a,inf)` uses `a + 10^j`, `(-inf,b)` uses `b - 10^j`, `(a,b)` uses
    /// `a + (b-a) 10^j/(1+10^j)` and the whole line uses `0` and `±10^j`.
    pub fn points(&self, interval: &Interval, prec: usize) -> Result<Vec<Real>> {
        let exps: &[i32] = match self {
            GridSpec::Points(ps) => {
                return ps
                    .iter()
                    .map(|&p| {
                        if interval.contains(p) {
                            Ok(Real::from_f64(p, prec))
                        } else {
                            Err(Error::Config(format!("grid point {p} outside {interval}")))
                        }
                    })
                    .collect();
            }
            GridSpec::Standard => &STANDARD_EXPONENTS,
            GridSpec::Exponents(e) => e,
        };
        let (lo, hi) = (interval.lo, interval.hi);
        let off = |j: i32| Real::pow10(j, prec);
        let pts = match (lo.is_finite(), hi.is_finite()) {
            (true, false) => exps.iter().map(|&j| Real::from_f64(lo, prec) + off(j)).collect(),
            (false, true) => exps.iter().map(|&j| Real::from_f64(hi, prec) - off(j)).collect(),
            (true, true) => {
                let a = Real::from_f64(lo, prec);
                let w = Real::from_f64(hi - lo, prec);
                exps.iter()
                    .map(|&j| {
                        let t = off(j);
                        let s = &t / &(&Real::one(prec) + &t);
                        &a + &(&w * &s)
                    })
                    .collect()
            }
            (false, false) => {
                let mut v: Vec<Real> = exps.iter().rev().map(|&j| -off(j)).collect();
                v.push(Real::zero(prec));
                v.extend(exps.iter().map(|&j| off(j)));
                v
            }
        };
        Ok(pts)
    }
}

/// Sign-violation thresholds; a value `v` violates `v >= 0` only when
/// `v < -max(eps_abs, eps_rel * scale)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerance {
    pub eps_abs: f64,
    pub eps_rel: f64,
    /// Relative agreement required between two routes to the same derivative.
    pub match_rel: f64,
}

impl Tolerance {
    pub fn for_precision(prec: usize) -> Tolerance {
        let p = prec as i32;
        Tolerance {
            eps_abs: 2f64.powi(-p / 2),
            eps_rel: 2f64.powi(-p / 4),
            match_rel: 2f64.powi(-p / 3),
        }
    }

    pub fn threshold(&self, scale: &Real) -> Real {
        let prec = scale.precision();
        let rel = &Real::from_f64(self.eps_rel, prec) * &scale.abs();
        Real::max(&Real::from_f64(self.eps_abs, prec), &rel)
    }

    pub fn violates(&self, v: &Real, scale: &Real) -> bool {
        *v < -self.threshold(scale)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Consistent,
    Refuted,
    Inapplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub order: usize,
    pub x: f64,
    /// The raw order-k quantity (`f^(k)` or `[ln f]^(k)`).
    pub value: f64,
    /// The sign-adjusted value the rule requires to be nonnegative.
    pub signed_value: f64,
    pub threshold: f64,
    /// Precision at which the violation was re-confirmed.
    pub confirmed_precision: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassVerdict {
    pub class: ClassSpec,
    pub interval: Interval,
    pub max_order: usize,
    pub sample_count: usize,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    /// First grid point where `f` (or `ln f`) could not be evaluated.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offending_point: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

enum PointEval {
    Values(Vec<Real>),
    Inapplicable(String),
}

fn is_evaluation_failure(e: &Error) -> bool {
    matches!(
        e,
        Error::Domain(_) | Error::DivisionByZero | Error::NearSingular(_) | Error::NonPositiveValue(_)
    )
}

/// Order-`k` quantities `f^(k)` (or `[ln f]^(k)` for the logarithmic
/// classes) at `x` for `k = 0..=max_order`.
pub fn class_values(
    e: &Expr,
    b: &Binding,
    x: &Real,
    spec: ClassSpec,
    max_order: usize,
) -> Result<Vec<Real>> {
    let jet = lift(e, x, max_order, b)?;
    let jet = if spec.is_logarithmic() {
        if !jet.value().is_positive() {
            return Err(Error::NonPositiveValue(jet.value().to_f64()));
        }
        jet.ln()?
    } else {
        jet
    };
    Ok(jet.derivatives())
}

fn eval_point(e: &Expr, b: &Binding, x: &Real, spec: ClassSpec, max_order: usize) -> Result<PointEval> {
    match class_values(e, b, x, spec, max_order) {
        Ok(v) => Ok(PointEval::Values(v)),
        Err(err) if is_evaluation_failure(&err) => Ok(PointEval::Inapplicable(err.to_string())),
        Err(err) => Err(err),
    }
}

/// Sign-rule sweep of `e` over `grid` on `interval`.
pub fn check_class(
    e: &Expr,
    b: &Binding,
    interval: &Interval,
    spec: ClassSpec,
    max_order: usize,
    grid: &GridSpec,
    tol: &Tolerance,
) -> Result<ClassVerdict> {
    if max_order > N_MAX {
        return Err(Error::OrderTooLarge { order: max_order, cap: N_MAX });
    }
    b.check_covers(e)?;
    let prec = b.precision();
    let points = grid.points(interval, prec)?;
    let evals: Vec<PointEval> = points
        .par_iter()
        .map(|x| eval_point(e, b, x, spec, max_order))
        .collect::<Result<_>>()?;

    let mut verdict = ClassVerdict {
        class: spec,
        interval: *interval,
        max_order,
        sample_count: points.len(),
        verdict: Verdict::Consistent,
        witness: None,
        offending_point: None,
        note: None,
    };

    if let Some((x, why)) = points.iter().zip(&evals).find_map(|(x, ev)| match ev {
        PointEval::Inapplicable(why) => Some((x, why)),
        PointEval::Values(_) => None,
    }) {
        verdict.verdict = Verdict::Inapplicable;
        verdict.offending_point = Some(x.to_f64());
        verdict.note = Some(why.clone());
        return Ok(verdict);
    }

    for (x, ev) in points.iter().zip(&evals) {
        let PointEval::Values(values) = ev else { continue };
        for k in spec.first_order()..=max_order {
            let s = spec.signed(k, &values[k]);
            if !tol.violates(&s, &values[k]) {
                continue;
            }
            if let Some(w) = confirm(e, b, x, spec, k, tol)? {
                verdict.verdict = Verdict::Refuted;
                verdict.witness = Some(w);
                return Ok(verdict);
            }
        }
    }
    Ok(verdict)
}

/// Re-evaluates a suspected violation at twice the precision.
fn confirm(
    e: &Expr,
    b: &Binding,
    x: &Real,
    spec: ClassSpec,
    k: usize,
    tol: &Tolerance,
) -> Result<Option<Witness>> {
    let hp = 2 * b.precision();
    let bh = b.at_precision(hp);
    let xh = x.with_precision(hp);
    let values = match class_values(e, &bh, &xh, spec, k) {
        Ok(v) => v,
        Err(err) if is_evaluation_failure(&err) => return Ok(None),
        Err(err) => return Err(err),
    };
    let s = spec.signed(k, &values[k]);
    if !tol.violates(&s, &values[k]) {
        return Ok(None);
    }
    Ok(Some(Witness {
        order: k,
        x: x.to_f64(),
        value: values[k].to_f64(),
        signed_value: s.to_f64(),
        threshold: tol.threshold(&values[k]).to_f64(),
        confirmed_precision: hp,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InclusionVariant {
    /// LCM implies CM, through the signed expansion.
    #[serde(rename = "lcm=>cm")]
    LcmToCm,
    /// LAM implies AM, through the plain expansion.
    #[serde(rename = "lam=>am")]
    LamToAm,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InclusionRow {
    pub x: f64,
    pub order: usize,
    /// Log-derivative signs satisfy the hypothesis class through `max_order`.
    pub hypothesis_holds: bool,
    pub min_term: f64,
    pub max_abs_term: f64,
    /// Sum of the expansion terms: `f^(n)` or `(-1)^n f^(n)`.
    pub total: f64,
    /// The same quantity straight from the jet of `f`.
    pub jet_value: f64,
    pub rel_error: f64,
    pub terms_ok: bool,
    pub total_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InclusionReport {
    pub variant: InclusionVariant,
    pub interval: Interval,
    pub max_order: usize,
    pub rows: Vec<InclusionRow>,
    pub passed: bool,
}

/// Recomputes `f^(n)` (or `(-1)^n f^(n)`) term by term from the log
/// derivatives and checks term signs and agreement with the jet of `f`.
pub fn verify_inclusion(
    e: &Expr,
    b: &Binding,
    interval: &Interval,
    variant: InclusionVariant,
    max_order: usize,
    grid: &GridSpec,
    tol: &Tolerance,
) -> Result<InclusionReport> {
    if max_order > N_MAX {
        return Err(Error::OrderTooLarge { order: max_order, cap: N_MAX });
    }
    b.check_covers(e)?;
    let points = grid.points(interval, b.precision())?;
    let per_point: Vec<Vec<InclusionRow>> = points
        .par_iter()
        .map(|x| inclusion_rows(e, b, x, variant, max_order, tol))
        .collect::<Result<_>>()?;
    let rows: Vec<InclusionRow> = per_point.into_iter().flatten().collect();
    let passed = rows
        .iter()
        .all(|r| r.total_ok && (!r.hypothesis_holds || r.terms_ok));
    Ok(InclusionReport { variant, interval: *interval, max_order, rows, passed })
}

fn inclusion_rows(
    e: &Expr,
    b: &Binding,
    x: &Real,
    variant: InclusionVariant,
    max_order: usize,
    tol: &Tolerance,
) -> Result<Vec<InclusionRow>> {
    let jet = lift(e, x, max_order, b)?;
    let f = jet.value().clone();
    if !f.is_positive() {
        return Err(Error::NonPositiveValue(f.to_f64()));
    }
    let fd = jet.derivatives();
    let logd = jet.ln()?.derivatives();
    let (class, alternating) = match variant {
        InclusionVariant::LcmToCm => (ClassSpec::Lcm, true),
        InclusionVariant::LamToAm => (ClassSpec::Lam, false),
    };
    let hyp: Vec<Real> = logd.iter().enumerate().map(|(k, v)| class.signed(k, v)).collect();
    let hypothesis_holds = (1..=max_order).all(|k| !tol.violates(&hyp[k], &logd[k]));

    let mut rows = Vec::with_capacity(max_order);
    for n in 1..=max_order {
        let (terms, jet_value) = if alternating {
            let t = signed_terms(&f, &hyp, n)?;
            (t, class.signed(n, &fd[n]))
        } else {
            (exp_of_log(&f, &logd, n)?.terms, fd[n].clone())
        };
        let prec = f.precision();
        let total = terms.iter().fold(Real::zero(prec), |a, t| a + t);
        let max_abs = terms.iter().fold(Real::zero(prec), |a, t| Real::max(&a, &t.abs()));
        let min_term = terms
            .iter()
            .fold(None::<Real>, |m, t| match m {
                Some(m) if m <= *t => Some(m),
                _ => Some(t.clone()),
            })
            .unwrap_or_else(|| Real::zero(prec));
        let terms_ok = terms.iter().all(|t| !tol.violates(t, &max_abs));
        // cancellation between terms bounds the attainable agreement
        let scale = Real::max(&max_abs, &jet_value.abs());
        let err = (&total - &jet_value).abs();
        let rel_error = if scale.is_zero() { 0.0 } else { (&err / &scale).to_f64() };
        rows.push(InclusionRow {
            x: x.to_f64(),
            order: n,
            hypothesis_holds,
            min_term: min_term.to_f64(),
            max_abs_term: max_abs.to_f64(),
            total: total.to_f64(),
            jet_value: jet_value.to_f64(),
            rel_error,
            terms_ok,
            total_ok: rel_error <= tol.match_rel,
        });
    }
    Ok(rows)
}
