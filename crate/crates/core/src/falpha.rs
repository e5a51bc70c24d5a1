//! Closed-form analysis of `F(x) = (1 + alpha/x)^(x + beta)`.
//!
//! Log-derivatives, the threshold `theta_alpha`, the kernels `q` and `p`,
//! the eight-entry membership classifier and the shifted CM checks.

use std::fmt;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::expr::{make_f, Binding, Expr, FFunction};
use crate::interval::Interval;
use crate::mono::{check_class, ClassSpec, ClassVerdict, GridSpec, Tolerance, Verdict};
use crate::real::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct ParamPoint {
    pub alpha: Real,
    pub beta: Real,
}

impl ParamPoint {
    pub fn new(alpha: Real, beta: Real) -> Result<ParamPoint> {
        if alpha.is_zero() {
            return Err(Error::InvalidParameter("alpha must be nonzero".into()));
        }
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidParameter("alpha and beta must be finite".into()));
        }
        Ok(ParamPoint { alpha, beta })
    }

    pub fn from_f64(alpha: f64, beta: f64, prec: usize) -> Result<ParamPoint> {
        ParamPoint::new(Real::from_f64(alpha, prec), Real::from_f64(beta, prec))
    }

    pub fn precision(&self) -> usize {
        self.alpha.precision().max(self.beta.precision())
    }

    /// `F` or `1/F` as an expression in `x` with parameters `a`, `b`.
    pub fn function(&self, reciprocal: bool) -> Result<FFunction> {
        make_f(&self.alpha, &self.beta, reciprocal, self.precision())
    }

    /// `1 + alpha/x > 0`, i.e. `x` lies in one of the two domain intervals.
    pub fn admissible(&self, x: &Real) -> bool {
        !x.is_zero() && (x * &(x + &self.alpha)).is_positive()
    }

    fn check_point(&self, x: &Real) -> Result<()> {
        if x.is_zero() || (x + &self.alpha).is_zero() {
            return Err(Error::Pole(x.to_f64()));
        }
        if !self.admissible(x) {
            return Err(Error::Domain(format!("1 + alpha/x <= 0 at x = {}", x.to_f64())));
        }
        Ok(())
    }
}

/// `[ln F]'(x) = ln(1 + alpha/x) - alpha (x + beta) / (x (x + alpha))`.
pub fn log_deriv1(p: &ParamPoint, x: &Real) -> Result<Real> {
    p.check_point(x)?;
    let (a, b) = (&p.alpha, &p.beta);
    let xa = x + a;
    let l = &xa.abs().ln() - &x.abs().ln();
    Ok(&l - &(&(a * &(x + b)) / &(x * &xa)))
}

/// `[ln F]''(x) = alpha [(2 beta - alpha) x + alpha beta] / (x^2 (x + alpha)^2)`.
pub fn log_deriv2(p: &ParamPoint, x: &Real) -> Result<Real> {
    p.check_point(x)?;
    let (a, b) = (&p.alpha, &p.beta);
    let num = a * &(&(&(&(b + b) - a) * x) + &(a * b));
    let den = &(x * x) * &(&(x + a) * &(x + a));
    Ok(&num / &den)
}

/// `theta_alpha(x) = x [(1 + x/alpha) ln(1 + alpha/x) - 1]`, the value of
/// `beta` at which `[ln F]'(x)` vanishes.
///
/// Evaluated as `x (eps/alpha) (ln|eps| - ln|x|) - x` with `eps = x + alpha`
/// so the `0 * inf` form at `x -> -alpha` stays accurate.
pub fn theta(alpha: &Real, x: &Real) -> Result<Real> {
    if alpha.is_zero() {
        return Err(Error::InvalidParameter("alpha must be nonzero".into()));
    }
    let eps = x + alpha;
    if x.is_zero() || eps.is_zero() {
        return Err(Error::Pole(x.to_f64()));
    }
    if !(x * &eps).is_positive() {
        return Err(Error::Domain(format!("1 + alpha/x <= 0 at x = {}", x.to_f64())));
    }
    let l = &eps.abs().ln() - &x.abs().ln();
    Ok(&(&(x * &(&eps / alpha)) * &l) - x)
}

/// Below this `|u|` the kernels use their Taylor series.
fn series_cutoff(prec: usize) -> Real {
    Real::pow2(-8, prec)
}

/// `q(u) = (e^u - u - 1) / (u (e^u - 1))`, with `q(0) = 1/2`.
pub fn q_kernel(u: &Real) -> Real {
    let prec = u.precision();
    if u.abs() < series_cutoff(prec) {
        // 1/2 - u/12 + u^3/720 - u^5/30240 + u^7/1209600
        let u2 = u * u;
        let c = |n: i64| Real::from_i64(n, prec);
        let mut s = &Real::one(prec) / &c(1209600);
        s = &(&s * &u2) - &(&Real::one(prec) / &c(30240));
        s = &(&s * &u2) + &(&Real::one(prec) / &c(720));
        s = &(&s * &u2) - &(&Real::one(prec) / &c(12));
        return &(&s * u) + &(&Real::one(prec) / &c(2));
    }
    let one = Real::one(prec);
    if u.is_positive() {
        // 1/u - e^-u/(1 - e^-u) avoids overflow for large u
        let em = (-u).exp();
        &(&one / u) - &(&em / &(&one - &em))
    } else {
        &(&one / u) - &(&one / &(&u.exp() - &one))
    }
}

/// `p(u) = (1 + (u - 1) e^u) / (u (1 - e^u))`, with `p(0) = -1/2`.
///
/// Identically `q(u) - 1`.
pub fn p_kernel(u: &Real) -> Real {
    &q_kernel(u) - &Real::one(u.precision())
}

/// `q_alpha(t) = alpha q(alpha t)`.
pub fn q_alpha(alpha: &Real, t: &Real) -> Real {
    alpha * &q_kernel(&(alpha * t))
}

/// `p_alpha(t) = alpha p(alpha t)`.
pub fn p_alpha(alpha: &Real, t: &Real) -> Real {
    alpha * &p_kernel(&(alpha * t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subject {
    F,
    InvF,
}

impl Subject {
    pub fn label(self) -> &'static str {
        match self {
            Subject::F => "F",
            Subject::InvF => "1/F",
        }
    }

    /// Column-safe tag used in CSV headers.
    pub fn tag(self) -> &'static str {
        match self {
            Subject::F => "F",
            Subject::InvF => "invF",
        }
    }
}

impl Serialize for Subject {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    BetaLeAlpha,
    BetaGeAlpha,
    TwoBetaGeAlpha,
    TwoBetaLeAlpha,
    BetaLeZero,
    BetaGeZero,
}

impl Condition {
    /// `(holds, boundary)`; `boundary` means the inequality is an equality.
    pub fn eval(self, alpha: &Real, beta: &Real) -> (bool, bool) {
        let zero = Real::zero(beta.precision());
        let two_beta = beta + beta;
        let (lhs, rhs) = match self {
            Condition::BetaLeAlpha | Condition::BetaGeAlpha => (beta.clone(), alpha.clone()),
            Condition::TwoBetaGeAlpha | Condition::TwoBetaLeAlpha => (two_beta, alpha.clone()),
            Condition::BetaLeZero | Condition::BetaGeZero => (beta.clone(), zero),
        };
        let holds = match self {
            Condition::BetaLeAlpha | Condition::TwoBetaLeAlpha | Condition::BetaLeZero => lhs <= rhs,
            _ => lhs >= rhs,
        };
        (holds, lhs == rhs)
    }

    pub fn text(self) -> &'static str {
        match self {
            Condition::BetaLeAlpha => "beta<=alpha",
            Condition::BetaGeAlpha => "beta>=alpha",
            Condition::TwoBetaGeAlpha => "2beta>=alpha",
            Condition::TwoBetaLeAlpha => "2beta<=alpha",
            Condition::BetaLeZero => "beta<=0",
            Condition::BetaGeZero => "beta>=0",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.text())
    }
}

impl Serialize for Condition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.text())
    }
}

/// Which of `F`, `1/F` (or neither) belongs to a class on its interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    F,
    InvF,
    Neither,
}

impl Serialize for Membership {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(match self {
            Membership::F => "F",
            Membership::InvF => "1/F",
            Membership::Neither => "neither",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionEntry {
    /// 1: LCM, alpha<0; 2: LCM, alpha>0; 3: LAM, alpha<0; 4: LAM, alpha>0.
    pub item: u8,
    pub subject: Subject,
    pub class: ClassSpec,
    pub condition: Condition,
    pub applicable: bool,
    pub interval: Option<Interval>,
    pub holds: Option<bool>,
    pub boundary: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionReport {
    pub alpha: f64,
    pub beta: f64,
    pub entries: Vec<RegionEntry>,
    /// Membership on the LCM interval of this sign of alpha.
    pub lcm_member: Membership,
    /// Membership on the LAM interval of this sign of alpha.
    pub lam_member: Membership,
}

impl RegionReport {
    pub fn entry(&self, item: u8, subject: Subject) -> &RegionEntry {
        self.entries
            .iter()
            .find(|e| e.item == item && e.subject == subject)
            .expect("all eight entries are present")
    }

    pub fn applicable(&self) -> impl Iterator<Item = &RegionEntry> {
        self.entries.iter().filter(|e| e.applicable)
    }

    pub fn any_boundary(&self) -> bool {
        self.applicable().any(|e| e.boundary == Some(true))
    }
}

const ITEMS: [(u8, bool, ClassSpec, Condition, Condition); 4] = [
    (1, false, ClassSpec::Lcm, Condition::BetaLeAlpha, Condition::TwoBetaGeAlpha),
    (2, true, ClassSpec::Lcm, Condition::TwoBetaGeAlpha, Condition::BetaLeZero),
    (3, false, ClassSpec::Lam, Condition::BetaGeZero, Condition::TwoBetaLeAlpha),
    (4, true, ClassSpec::Lam, Condition::TwoBetaLeAlpha, Condition::BetaGeAlpha),
];

/// Evaluates the eight iff-conditions; the four belonging to the other
/// sign of `alpha` are marked not applicable.
pub fn classify(p: &ParamPoint) -> Result<RegionReport> {
    if p.alpha.is_zero() {
        return Err(Error::InvalidParameter("alpha must be nonzero".into()));
    }
    let a = p.alpha.to_f64();
    let positive = p.alpha.is_positive();
    let lcm_iv = Interval { lo: 0f64.max(-a), hi: f64::INFINITY };
    let lam_iv = Interval { lo: f64::NEG_INFINITY, hi: 0f64.min(-a) };
    let mut entries = Vec::with_capacity(8);
    for (item, for_positive, class, cf, cinv) in ITEMS {
        for (subject, cond) in [(Subject::F, cf), (Subject::InvF, cinv)] {
            let applicable = for_positive == positive;
            let (holds, boundary) = cond.eval(&p.alpha, &p.beta);
            let interval = if class == ClassSpec::Lcm { lcm_iv } else { lam_iv };
            entries.push(RegionEntry {
                item,
                subject,
                class,
                condition: cond,
                applicable,
                interval: applicable.then_some(interval),
                holds: applicable.then_some(holds),
                boundary: applicable.then_some(boundary),
            });
        }
    }
    let member = |class: ClassSpec| {
        let holds = |s: Subject| {
            entries
                .iter()
                .any(|e| e.applicable && e.class == class && e.subject == s && e.holds == Some(true))
        };
        match (holds(Subject::F), holds(Subject::InvF)) {
            (true, _) => Membership::F,
            (false, true) => Membership::InvF,
            (false, false) => Membership::Neither,
        }
    };
    let lcm_member = member(ClassSpec::Lcm);
    let lam_member = member(ClassSpec::Lam);
    Ok(RegionReport { alpha: a, beta: p.beta.to_f64(), entries, lcm_member, lam_member })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcordanceRow {
    pub item: u8,
    pub subject: Subject,
    pub condition: Condition,
    pub predicted: bool,
    pub boundary: bool,
    pub verdict: ClassVerdict,
    /// Consistent where the condition holds, refuted where it fails.
    pub agrees: bool,
}

/// Runs `check_class` on every applicable entry of [`classify`].
pub fn concordance(
    p: &ParamPoint,
    max_order: usize,
    grid: &GridSpec,
    tol: &Tolerance,
) -> Result<Vec<ConcordanceRow>> {
    let report = classify(p)?;
    let entries: Vec<&RegionEntry> = report.applicable().collect();
    entries
        .par_iter()
        .map(|e| {
            let f = p.function(e.subject == Subject::InvF)?;
            let iv = e.interval.expect("applicable entries carry an interval");
            let verdict = check_class(&f.expr, &f.binding, &iv, e.class, max_order, grid, tol)?;
            let predicted = e.holds == Some(true);
            let agrees = match verdict.verdict {
                Verdict::Consistent => predicted,
                Verdict::Refuted => !predicted,
                Verdict::Inapplicable => false,
            };
            Ok(ConcordanceRow {
                item: e.item,
                subject: e.subject,
                condition: e.condition,
                predicted,
                boundary: e.boundary == Some(true),
                verdict,
                agrees,
            })
        })
        .collect()
}

/// Minimum distance from the lines `beta = alpha`, `beta = alpha/2`,
/// `beta = 0` for a concordance grid point.
pub const BOUNDARY_MARGIN: f64 = 0.1;

/// `|alpha| in {0.5, 1, 2}` (both signs), `beta` from `alpha - 1.5` to
/// `alpha/2 + 1.5` in steps of 0.25, dropping points near a boundary line.
pub fn concordance_grid() -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for a in [-2.0f64, -1.0, -0.5, 0.5, 1.0, 2.0] {
        let lo = a - 1.5;
        let hi = a / 2.0 + 1.5;
        let steps = ((hi - lo) / 0.25).round() as i64;
        for k in 0..=steps {
            let b = lo + 0.25 * k as f64;
            if off_boundary(a, b) {
                out.push((a, b));
            }
        }
    }
    out
}

pub fn off_boundary(alpha: f64, beta: f64) -> bool {
    (beta - alpha).abs() >= BOUNDARY_MARGIN
        && (beta - alpha / 2.0).abs() >= BOUNDARY_MARGIN
        && beta.abs() >= BOUNDARY_MARGIN
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftedEntry {
    pub subject: String,
    pub expression: String,
    pub interval: Interval,
    pub condition: Condition,
    pub expected: bool,
    pub boundary: bool,
    pub verdict: ClassVerdict,
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitCheck {
    pub x: f64,
    pub value: f64,
    pub target: f64,
    pub rel_error: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftedReport {
    pub alpha: f64,
    pub beta: f64,
    pub entries: Vec<ShiftedEntry>,
    /// `F(x) -> e^alpha` as `x -> inf`.
    pub limit: LimitCheck,
    pub passed: bool,
}

pub const LIMIT_POINT: f64 = 1e8;
pub const LIMIT_TOLERANCE: f64 = 1e-5;

/// CM sweeps of `F - e^alpha` and of `1/F - e^-alpha` (alpha > 0) or `1/F`
/// (alpha < 0) on `(max(0,-alpha), inf)`, compared with the sign conditions
/// `alpha<=2beta`, `beta<=0` (alpha > 0) and `beta<=alpha`, `2beta>=alpha`
/// (alpha < 0).
pub fn shifted_cm_check(p: &ParamPoint, grid: &GridSpec, max_order: usize) -> Result<ShiftedReport> {
    if p.alpha.is_zero() {
        return Err(Error::InvalidParameter("alpha must be nonzero".into()));
    }
    let prec = p.precision();
    let tol = Tolerance::for_precision(prec);
    let f = p.function(false)?;
    let finv = p.function(true)?;
    let a = || Expr::param("a");
    let cases: Vec<(String, Expr, Condition)> = if p.alpha.is_positive() {
        vec![
            ("F - exp(a)".into(), Expr::sub(f.expr.clone(), Expr::exp(a())), Condition::TwoBetaGeAlpha),
            (
                "1/F - exp(-a)".into(),
                Expr::sub(finv.expr.clone(), Expr::exp(Expr::neg(a()))),
                Condition::BetaLeZero,
            ),
        ]
    } else {
        vec![
            ("F - exp(a)".into(), Expr::sub(f.expr.clone(), Expr::exp(a())), Condition::BetaLeAlpha),
            ("1/F".into(), finv.expr.clone(), Condition::TwoBetaGeAlpha),
        ]
    };
    let interval = f.right;
    let entries = cases
        .into_iter()
        .map(|(subject, expr, condition)| {
            let verdict = check_class(&expr, &f.binding, &interval, ClassSpec::Cm, max_order, grid, &tol)?;
            let (expected, boundary) = condition.eval(&p.alpha, &p.beta);
            let agrees = match verdict.verdict {
                Verdict::Consistent => expected,
                Verdict::Refuted => !expected,
                Verdict::Inapplicable => false,
            };
            Ok(ShiftedEntry {
                subject,
                expression: expr.to_string(),
                interval,
                condition,
                expected,
                boundary,
                verdict,
                agrees,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let x = Real::from_f64(LIMIT_POINT, prec);
    let value = crate::expr::eval(&f.expr, &x, &f.binding)?;
    let target = p.alpha.exp();
    let rel = (&(&value - &target) / &target).abs().to_f64();
    let limit = LimitCheck {
        x: LIMIT_POINT,
        value: value.to_f64(),
        target: target.to_f64(),
        rel_error: rel,
        passed: rel <= LIMIT_TOLERANCE,
    };
    let passed = limit.passed && entries.iter().all(|e| e.agrees);
    Ok(ShiftedReport { alpha: p.alpha.to_f64(), beta: p.beta.to_f64(), entries, limit, passed })
}

/// Binding carrying `a = alpha`, `b = beta`.
pub fn binding(p: &ParamPoint) -> Result<Binding> {
    Ok(Binding::new(p.precision())?.with("a", p.alpha.clone()).with("b", p.beta.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::lift;
    use crate::real::rel_diff;
    use proptest::prelude::*;

    const P: usize = 256;

    fn r(v: f64) -> Real {
        Real::from_f64(v, P)
    }

    fn pp(a: f64, b: f64) -> ParamPoint {
        ParamPoint::from_f64(a, b, P).unwrap()
    }

    /// A point strictly outside the closed segment between 0 and -a.
    fn admissible(a: f64, right: bool, offset: f64) -> f64 {
        if right {
            0f64.max(-a) + offset
        } else {
            0f64.min(-a) - offset
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn closed_forms_match_jets(
            a in prop::sample::select(vec![-2.0, -1.0, -0.5, 0.5, 1.0, 2.0]),
            b in -3.0f64..3.0,
            right: bool,
            offset in 0.05f64..20.0,
        ) {
            let p = pp(a, b);
            let x = r(admissible(a, right, offset));
            let f = p.function(false).unwrap();
            let d = lift(&f.expr, &x, 2, &f.binding).unwrap().ln().unwrap().derivatives();
            prop_assert!(rel_diff(&d[1], &log_deriv1(&p, &x).unwrap()) < 1e-30);
            prop_assert!(rel_diff(&d[2], &log_deriv2(&p, &x).unwrap()) < 1e-30);
        }

        #[test]
        fn theta_zeroes_first_log_derivative(
            mag in 0.2f64..3.0,
            negative: bool,
            right: bool,
            offset in 1e-3f64..50.0,
        ) {
            let a = if negative { -mag } else { mag };
            let x = admissible(a, right, offset);
            let (ar, xr) = (r(a), r(x));
            let t = theta(&ar, &xr).unwrap();
            let v = log_deriv1(&ParamPoint::new(ar, t).unwrap(), &xr).unwrap();
            prop_assert!(v.to_f64().abs() < 1e-25, "a={} x={}", a, x);
        }
    }

    #[test]
    fn log_derivative_values() {
        // oracle: mpmath evaluation of the closed forms
        let cases = [
            (-1.0, -1.0, 2.0, 0.25),
            (1.0, 1.0, 1.0, 0.5),
            (-1.0, 0.0, -1.0, 0.25),
            (1.0, 0.0, -3.0, 1.0 / 12.0),
            (2.0, -1.0, -5.0, 0.16),
        ];
        for (a, b, x, want) in cases {
            let v = log_deriv2(&pp(a, b), &r(x)).unwrap();
            assert!(rel_diff(&v, &r(want)) < 1e-15, "{a} {b} {x}");
        }
        let v = log_deriv2(&pp(-2.0, 0.5), &r(3.0)).unwrap().to_f64();
        assert!((v + 16.0 / 9.0).abs() < 1e-15);
        let v = log_deriv1(&pp(1.0, 1.0), &r(1.0)).unwrap().to_f64();
        assert!((v - (2f64.ln() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn poles_and_domain() {
        let p = pp(-1.0, 0.0);
        assert_eq!(log_deriv1(&p, &r(0.0)), Err(Error::Pole(0.0)));
        assert_eq!(log_deriv2(&p, &r(1.0)), Err(Error::Pole(1.0)));
        assert!(matches!(log_deriv1(&p, &r(0.5)), Err(Error::Domain(_))));
        assert!(matches!(theta(&r(1.0), &r(-0.5)), Err(Error::Domain(_))));
        assert_eq!(theta(&r(1.0), &r(-1.0)), Err(Error::Pole(-1.0)));
        assert!(ParamPoint::from_f64(0.0, 1.0, P).is_err());
    }

    #[test]
    fn log_derivative_limits() {
        for x in [1e8, -1e8] {
            for (a, b) in [(1.0, 1.0), (-1.0, 2.0)] {
                assert!(log_deriv1(&pp(a, b), &r(x)).unwrap().to_f64().abs() < 1e-6);
                assert!(log_deriv2(&pp(a, b), &r(x)).unwrap().to_f64().abs() < 1e-6);
            }
        }
    }

    #[test]
    fn theta_limits() {
        let v = theta(&r(-1.0), &r(1e8)).unwrap().to_f64();
        assert!((v + 0.5).abs() < 1e-6);
        let v = theta(&r(-1.0), &(&r(1.0) + &Real::pow10(-8, P))).unwrap().to_f64();
        assert!((v + 1.0).abs() < 1e-3);
        let v = theta(&r(1.0), &r(1e-8)).unwrap().to_f64();
        assert!(v.abs() < 1e-6);
        let v = theta(&r(-1.0), &r(-1e-8)).unwrap().to_f64();
        assert!(v.abs() < 1e-6);
        let v = theta(&r(-1.0), &r(-1e8)).unwrap().to_f64();
        assert!((v + 0.5).abs() < 1e-6);
    }

    #[test]
    fn kernel_values() {
        let q = |u: f64| q_kernel(&r(u)).to_f64();
        let p = |u: f64| p_kernel(&r(u)).to_f64();
        assert_eq!(q(0.0), 0.5);
        assert_eq!(p(0.0), -0.5);
        assert!((q(-1e-8) - 0.5).abs() < 1e-8);
        assert!((q(1e-8) - 0.5).abs() < 1e-8);
        // oracle: mpmath at 50 digits
        assert!((q(-50.0) - 0.98).abs() < 1e-15);
        assert!((q(50.0) - 0.02).abs() < 1e-15);
        assert!((q(1.0) - 0.4180232931306735).abs() < 1e-15);
        // either side of the series cutoff 2^-8, oracle: mpmath at 60 digits
        let c = Real::pow2(-8, P);
        let below = q_kernel(&(&c - &Real::pow2(-60, P)));
        let above = q_kernel(&(&c + &Real::pow2(-60, P)));
        let want_below = Real::from_rational(&"499674479249450865517784435640507391399566685146/1000000000000000000000000000000000000000000000000".parse().unwrap(), P);
        let want_above = Real::from_rational(&"499674479249450865373224256266455025429020714006/1000000000000000000000000000000000000000000000000".parse().unwrap(), P);
        assert!(rel_diff(&below, &want_below) < 1e-28);
        assert!(rel_diff(&above, &want_above) < 1e-40);
    }

    #[test]
    fn p_matches_its_definition() {
        for u in [-30.0, -2.0, -0.1, 0.1, 2.0, 30.0] {
            let ur = r(u);
            let e = ur.exp();
            let one = Real::one(P);
            let direct = &(&one + &(&(&ur - &one) * &e)) / &(&ur * &(&one - &e));
            assert!(rel_diff(&p_kernel(&ur), &direct) < 1e-60, "u={u}");
        }
    }

    #[test]
    fn kernels_strictly_decreasing() {
        for sign in [-1.0, 1.0] {
            let pts: Vec<f64> = (0..200)
                .map(|i| sign * 10f64.powf(-6.0 + 7.69897 * i as f64 / 199.0))
                .collect();
            let mut pts = pts;
            pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for w in pts.windows(2) {
                let (u0, u1) = (r(w[0]), r(w[1]));
                assert!(q_kernel(&u0) > q_kernel(&u1), "q at {} {}", w[0], w[1]);
                assert!(p_kernel(&u0) > p_kernel(&u1), "p at {} {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn classify_examples() {
        let rep = classify(&pp(1.0, 1.0)).unwrap();
        assert_eq!(rep.entries.len(), 8);
        assert_eq!(rep.entry(2, Subject::F).holds, Some(true));
        assert_eq!(rep.entry(2, Subject::InvF).holds, Some(false));
        assert_eq!(rep.entry(4, Subject::F).holds, Some(false));
        assert_eq!(rep.entry(4, Subject::InvF).holds, Some(true));
        assert!(!rep.entry(1, Subject::F).applicable);
        assert_eq!(rep.entry(1, Subject::F).holds, None);
        assert_eq!(rep.entry(4, Subject::F).interval, Some(Interval { lo: f64::NEG_INFINITY, hi: -1.0 }));
        assert_eq!(rep.lcm_member, Membership::F);
        assert_eq!(rep.lam_member, Membership::InvF);

        let rep = classify(&pp(-1.0, -1.0)).unwrap();
        let e = rep.entry(1, Subject::F);
        assert_eq!((e.holds, e.boundary), (Some(true), Some(true)));
        assert_eq!(e.interval, Some(Interval { lo: 1.0, hi: f64::INFINITY }));
        assert_eq!(rep.entry(1, Subject::InvF).holds, Some(false));
        assert_eq!(rep.entry(3, Subject::F).holds, Some(false));
        assert_eq!(rep.entry(3, Subject::InvF).holds, Some(true));

        let rep = classify(&pp(2.0, 1.0)).unwrap();
        let e = rep.entry(2, Subject::F);
        assert_eq!((e.holds, e.boundary), (Some(true), Some(true)));
    }

    #[test]
    fn gap_reports_neither() {
        let rep = classify(&pp(-1.0, -0.75)).unwrap();
        assert_eq!(rep.lcm_member, Membership::Neither);
        let rep = classify(&pp(1.0, 0.25)).unwrap();
        assert_eq!(rep.lcm_member, Membership::Neither);
    }

    #[test]
    fn concordance_off_boundary() {
        let tol = Tolerance::for_precision(P);
        for (a, b) in [(1.0, 1.0), (1.0, -0.5), (-1.0, -1.5), (-1.0, 0.5), (0.5, 0.75), (-2.0, -1.5)] {
            let rows = concordance(&pp(a, b), 8, &GridSpec::Standard, &tol).unwrap();
            assert_eq!(rows.len(), 4);
            for row in rows {
                assert!(row.agrees, "({a},{b}) item {} {:?}: {:?}", row.item, row.subject, row.verdict);
            }
        }
    }

    #[test]
    fn shifted_examples() {
        for (a, b) in [(1.0, 1.0), (1.0, -1.0), (-1.0, -2.0)] {
            let rep = shifted_cm_check(&pp(a, b), &GridSpec::Standard, 8).unwrap();
            assert!(rep.limit.passed, "{:?}", rep.limit);
            for e in &rep.entries {
                assert!(e.agrees, "({a},{b}) {}: {:?}", e.subject, e.verdict);
            }
            assert!(rep.passed);
        }
    }
}
