//! Quadrature checks of the Laplace-type integral identities and
//! synthesis of completely monotonic functions from discrete measures.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::falpha::{log_deriv2, p_alpha, q_alpha, ParamPoint};
use crate::real::Real;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<Real>,
    pub weights: Vec<Real>,
}

type RuleCache = Mutex<HashMap<(usize, usize), Arc<GaussLegendre>>>;

fn rule_cache() -> &'static RuleCache {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `(P_n(z), P_n'(z))` by the three-term recurrence.
fn legendre(n: usize, z: &Real) -> (Real, Real) {
    let prec = z.precision();
    let one = Real::one(prec);
    let (mut p0, mut p1) = (one.clone(), z.clone());
    for k in 2..=n {
        let kk = Real::from_i64(k as i64, prec);
        let a = Real::from_i64(2 * k as i64 - 1, prec);
        let b = Real::from_i64(k as i64 - 1, prec);
        let p2 = &(&(&(&a * z) * &p1) - &(&b * &p0)) / &kk;
        p0 = p1;
        p1 = p2;
    }
    let nn = Real::from_i64(n as i64, prec);
    let d = &(&nn * &(&(z * &p1) - &p0)) / &(&(z * z) - &one);
    (p1, d)
}

/// `n`-point rule at precision `prec`, cached.
pub fn gauss_legendre(n: usize, prec: usize) -> Arc<GaussLegendre> {
    if let Some(r) = rule_cache().lock().expect("rule cache").get(&(n, prec)) {
        return r.clone();
    }
    let wp = prec + 32;
    let tol = Real::pow2(-(prec as i32) - 8, wp);
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 1..=n {
        // Tricomi's initial guess, then Newton
        let g = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
        let mut z = Real::from_f64(g, wp);
        for _ in 0..100 {
            let (p, d) = legendre(n, &z);
            let dz = &p / &d;
            z = &z - &dz;
            if dz.abs() < tol {
                break;
            }
        }
        let (_, d) = legendre(n, &z);
        let one = Real::one(wp);
        let w = &Real::from_i64(2, wp) / &(&(&one - &(&z * &z)) * &(&d * &d));
        nodes.push(z.with_precision(prec));
        weights.push(w.with_precision(prec));
    }
    let rule = Arc::new(GaussLegendre { nodes, weights });
    rule_cache().lock().expect("rule cache").insert((n, prec), rule.clone());
    rule
}

/// Composite Gauss–Legendre settings.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub nodes_per_panel: usize,
    pub min_panels: usize,
    pub max_panels: usize,
    /// Stop once doubling the panel count changes the estimate by less than this, relatively.
    pub rel_tol: f64,
}

impl Default for Quadrature {
    fn default() -> Quadrature {
        Quadrature { nodes_per_panel: 20, min_panels: 4, max_panels: 4096, rel_tol: 1e-20 }
    }
}

#[derive(Debug, Clone)]
pub struct QuadResult {
    pub value: Real,
    /// Estimate with half as many panels.
    pub previous: Real,
    pub panels: usize,
    pub lo: Real,
    pub hi: Real,
}

impl QuadResult {
    /// Relative change between the last two panel counts.
    pub fn doubling_change(&self) -> f64 {
        rel_change(&self.value, &self.previous)
    }
}

fn rel_change(new: &Real, old: &Real) -> f64 {
    let d = (new - old).abs();
    if new.is_zero() {
        return d.to_f64();
    }
    (&d / &new.abs()).to_f64()
}

/// Nodes of the composite rule with `panels` equal panels on `[a, b]`.
pub fn composite_nodes(a: &Real, b: &Real, panels: usize, n: usize) -> Vec<(Real, Real)> {
    let prec = a.precision();
    let rule = gauss_legendre(n, prec);
    let h = &(b - a) / &Real::from_i64(panels as i64, prec);
    let half = &h / &Real::from_i64(2, prec);
    let mut out = Vec::with_capacity(panels * n);
    for k in 0..panels {
        let mid = &(a + &(&h * &Real::from_i64(k as i64, prec))) + &half;
        for (z, w) in rule.nodes.iter().zip(&rule.weights) {
            out.push((&mid + &(&half * z), &half * w));
        }
    }
    out
}

impl Quadrature {
    /// Fixed composite rule; panels run in parallel and are summed in order.
    pub fn fixed<F>(&self, f: &F, a: &Real, b: &Real, panels: usize) -> Result<Real>
    where
        F: Fn(&Real) -> Result<Real> + Sync,
    {
        let prec = a.precision();
        let rule = gauss_legendre(self.nodes_per_panel, prec);
        let h = &(b - a) / &Real::from_i64(panels as i64, prec);
        let half = &h / &Real::from_i64(2, prec);
        let sums: Vec<Real> = (0..panels)
            .into_par_iter()
            .map(|k| {
                let mid = &(a + &(&h * &Real::from_i64(k as i64, prec))) + &half;
                let mut s = Real::zero(prec);
                for (z, w) in rule.nodes.iter().zip(&rule.weights) {
                    s = &s + &(w * &f(&(&mid + &(&half * z)))?);
                }
                Ok(&s * &half)
            })
            .collect::<Result<_>>()?;
        Ok(sums.iter().fold(Real::zero(prec), |acc, s| &acc + s))
    }

    /// Doubles the panel count until the estimate settles.
    pub fn integrate<F>(&self, f: &F, a: &Real, b: &Real) -> Result<QuadResult>
    where
        F: Fn(&Real) -> Result<Real> + Sync,
    {
        let mut panels = self.min_panels.max(1);
        let mut prev = self.fixed(f, a, b, panels)?;
        while panels < self.max_panels {
            panels *= 2;
            let cur = self.fixed(f, a, b, panels)?;
            let settled = rel_change(&cur, &prev) < self.rel_tol
                || (&cur - &prev).abs() < Real::pow2(-(a.precision() as i32) / 2, a.precision());
            if settled {
                return Ok(QuadResult { value: cur, previous: prev, panels, lo: a.clone(), hi: b.clone() });
            }
            prev = cur;
        }
        Err(Error::QuadratureNonConvergence(format!(
            "no agreement to {:e} with {} panels on [{}, {}]",
            self.rel_tol,
            self.max_panels,
            a.to_f64(),
            b.to_f64()
        )))
    }
}

/// Smallest `T` (approximately) with `amp (1+T)^deg e^(-rate T) / rate < 2^(-prec/2)`.
pub fn tail_cutoff(rate: &Real, degree: f64, amplitude: f64, prec: usize) -> Result<Real> {
    let c = rate.to_f64();
    if !(c > 0.0) {
        return Err(Error::QuadratureNonConvergence(format!("decay rate {c} is not positive")));
    }
    let target = (prec as f64 / 2.0) * std::f64::consts::LN_2 + amplitude.max(1.0).ln();
    let mut t = 1.0f64;
    for _ in 0..60 {
        let next = (target + degree.max(0.0) * (1.0 + t).ln() - c.ln()) / c;
        if (next - t).abs() <= 1e-9 * t {
            t = next;
            break;
        }
        t = next.max(1e-300);
    }
    Ok(Real::from_f64(t * 1.05, prec))
}

const SPOUGE_GUARD: usize = 64;

/// `Gamma(r)` for `r > 0` by Spouge's approximation, with guard bits
/// covering the cancellation in its coefficient sum.
pub fn gamma(r: &Real) -> Result<Real> {
    if !r.is_positive() {
        return Err(Error::Domain(format!("gamma needs r > 0, got {}", r.to_f64())));
    }
    let prec = r.precision();
    // relative error below (2 pi)^-(a + 1/2)
    let a = ((prec as f64) * std::f64::consts::LN_2 / (2.0 * std::f64::consts::PI).ln()).ceil() as i64 + 2;
    let wp = prec + SPOUGE_GUARD + 2 * a as usize;
    let z = &r.with_precision(wp) - &Real::one(wp);
    let ar = Real::from_i64(a, wp);
    let two_pi = &Real::pi(wp) * &Real::from_i64(2, wp);
    let half = &Real::one(wp) / &Real::from_i64(2, wp);
    let mut sum = two_pi.sqrt();
    let mut fact = Real::one(wp);
    for k in 1..a {
        let kr = Real::from_i64(k, wp);
        if k > 1 {
            fact = &fact * &Real::from_i64(k - 1, wp);
        }
        let base = &ar - &kr;
        let ck = &(&base.powf(&(&kr - &half)) * &base.exp()) / &fact;
        let term = &ck / &(&z + &kr);
        sum = if k % 2 == 1 { &sum + &term } else { &sum - &term };
    }
    let za = &z + &ar;
    let v = &(&za.powf(&(&z + &half)) * &(-&za).exp()) * &sum;
    // Gamma(z+1) / z = Gamma(z) when r = z + 1
    Ok(v.with_precision(prec))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Triplet {
    pub lhs: f64,
    pub rhs: f64,
    pub error: f64,
    pub passed: bool,
}

pub const POWER_TOLERANCE: f64 = 1e-8;
pub const INTEGRAL_TOLERANCE: f64 = 1e-8;

/// `x^-r` against `(1/Gamma(r)) int_0^inf t^(r-1) e^(-x t) dt`.
///
/// For `r < 1` the substitution `t = s^(1/r)` turns the integrand into
/// the bounded `e^(-x s^(1/r)) / r`.
pub fn power_identity_check(x: &Real, r: &Real) -> Result<Triplet> {
    if !x.is_positive() || !r.is_positive() {
        return Err(Error::InvalidParameter("power identity needs x > 0 and r > 0".into()));
    }
    let prec = x.precision();
    let one = Real::one(prec);
    let lhs = &one / &x.powf(r);
    let t_end = tail_cutoff(x, (r.to_f64() - 1.0).max(0.0), 1.0, prec)?;
    let quad = Quadrature { rel_tol: 1e-14, ..Quadrature::default() };
    let value = if *r < one {
        let inv = &one / r;
        let f = |s: &Real| -> Result<Real> {
            if s.is_zero() {
                return Ok(inv.clone());
            }
            Ok(&inv * &(-&(x * &s.powf(&inv))).exp())
        };
        quad.integrate(&f, &Real::zero(prec), &t_end.powf(r))?.value
    } else {
        let rm1 = r - &one;
        let f = |t: &Real| -> Result<Real> {
            let p = if rm1.is_zero() { one.clone() } else { t.powf(&rm1) };
            Ok(&p * &(-&(x * t)).exp())
        };
        quad.integrate(&f, &Real::zero(prec), &t_end)?.value
    };
    let rhs = &value / &gamma(r)?;
    let error = (&(&lhs - &rhs) / &lhs).abs().to_f64();
    Ok(Triplet { lhs: lhs.to_f64(), rhs: rhs.to_f64(), error, passed: error <= POWER_TOLERANCE })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegralBranch {
    /// `int [beta - q_alpha(t)] t (e^(alpha t) - 1) e^(-(x+alpha) t) dt`, `x > max(0,-alpha)`.
    QKernel,
    /// `int [beta + p_alpha(t)] t (1 - e^(alpha t)) e^(x t) dt`, `x < min(0,-alpha)`.
    PKernel,
}

pub fn branch_for(p: &ParamPoint, x: &Real) -> Result<IntegralBranch> {
    let xa = x + &p.alpha;
    if x.is_positive() && xa.is_positive() {
        Ok(IntegralBranch::QKernel)
    } else if x.is_negative() && xa.is_negative() {
        Ok(IntegralBranch::PKernel)
    } else {
        Err(Error::Branch { alpha: p.alpha.to_f64(), x: x.to_f64() })
    }
}

/// The sign-carrying factor of the integrand at `t`:
/// `t (e^(alpha t) - 1) e^(-(x+alpha) t)` or `t (1 - e^(alpha t)) e^(x t)`.
pub fn kernel_factor(p: &ParamPoint, x: &Real, t: &Real) -> Result<Real> {
    let ea = (&p.alpha * t).exp();
    let one = Real::one(t.precision());
    Ok(match branch_for(p, x)? {
        IntegralBranch::QKernel => &(t * &(&ea - &one)) * &(-&(&(x + &p.alpha) * t)).exp(),
        IntegralBranch::PKernel => &(t * &(&one - &ea)) * &(x * t).exp(),
    })
}

fn integrand(p: &ParamPoint, x: &Real, branch: IntegralBranch, t: &Real) -> Result<Real> {
    if t.is_zero() {
        return Ok(Real::zero(t.precision()));
    }
    let factor = kernel_factor(p, x, t)?;
    let weight = match branch {
        IntegralBranch::QKernel => &p.beta - &q_alpha(&p.alpha, t),
        IntegralBranch::PKernel => &p.beta + &p_alpha(&p.alpha, t),
    };
    Ok(&weight * &factor)
}

/// Slowest exponential decay rate of the integrand.
fn decay_rate(p: &ParamPoint, x: &Real, branch: IntegralBranch) -> Real {
    let xa = x + &p.alpha;
    match branch {
        IntegralBranch::QKernel => if *x < xa { x.clone() } else { xa },
        IntegralBranch::PKernel => -&Real::max(x, &xa),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegralCheck {
    pub alpha: f64,
    pub beta: f64,
    pub x: f64,
    pub branch: IntegralBranch,
    pub integral: f64,
    pub closed_form: f64,
    pub error: f64,
    pub passed: bool,
    pub panels: usize,
    pub cutoff: f64,
    pub doubling_change: f64,
}

/// Quadrature of the integral form of `[ln F]''(x)` against the closed form.
pub fn log_f2_integral(p: &ParamPoint, x: &Real) -> Result<IntegralCheck> {
    let branch = branch_for(p, x)?;
    let prec = p.precision();
    let x = x.with_precision(prec);
    let closed = log_deriv2(p, &x)?;
    let rate = decay_rate(p, &x, branch);
    let amp = p.alpha.to_f64().abs() + p.beta.to_f64().abs() + 1.0;
    let t_end = tail_cutoff(&rate, 1.0, amp, prec)?;
    let f = |t: &Real| integrand(p, &x, branch, t);
    let q = Quadrature::default().integrate(&f, &Real::zero(prec), &t_end)?;
    let err_vs_closed = if closed.is_zero() {
        q.value.abs().to_f64()
    } else {
        (&(&q.value - &closed) / &closed).abs().to_f64()
    };
    Ok(IntegralCheck {
        alpha: p.alpha.to_f64(),
        beta: p.beta.to_f64(),
        x: x.to_f64(),
        branch,
        integral: q.value.to_f64(),
        closed_form: closed.to_f64(),
        error: err_vs_closed,
        passed: err_vs_closed <= INTEGRAL_TOLERANCE,
        panels: q.panels,
        cutoff: t_end.to_f64(),
        doubling_change: q.doubling_change(),
    })
}

/// `(alpha, beta, x)` triples covering both integral representations.
pub const STANDARD_TRIPLES: [(f64, f64, f64); 10] = [
    (-1.0, -1.0, 2.0),
    (1.0, 1.0, 1.0),
    (-2.0, 0.5, 3.0),
    (0.5, -0.25, 0.7),
    (2.0, 3.0, 0.1),
    (-1.0, 0.0, -1.0),
    (1.0, 0.0, -3.0),
    (2.0, -1.0, -5.0),
    (-0.5, 1.0, -0.2),
    (1.5, 0.5, -4.0),
];

/// `(x, r)` pairs for the power identity.
pub fn standard_power_cases() -> Vec<(f64, f64)> {
    let mut v = Vec::new();
    for r in [0.5, 1.0, 2.0] {
        for x in [1.0, 2.0, 10.0] {
            v.push((x, r));
        }
    }
    v
}

/// Finite positive measure `sum w_j delta_(t_j)` on `[0, inf)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    atoms: Vec<(f64, f64)>,
}

impl DiscreteMeasure {
    /// Atoms `(t, w)` with `t >= 0`, `w > 0`, distinct `t`; stored sorted by `t`.
    pub fn new(mut atoms: Vec<(f64, f64)>) -> Result<DiscreteMeasure> {
        for &(t, w) in &atoms {
            if !t.is_finite() || t < 0.0 {
                return Err(Error::InvalidParameter(format!("atom location {t} must be finite and >= 0")));
            }
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::InvalidParameter(format!("atom weight {w} must be finite and > 0")));
            }
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        if atoms.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidParameter("atom locations must be distinct".into()));
        }
        Ok(DiscreteMeasure { atoms })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }
}

/// `sum w_j e^(-t_j x)` as an expression.
pub fn bernstein_synthesize(m: &DiscreteMeasure) -> Expr {
    let term = |&(t, w): &(f64, f64)| -> Expr {
        let c = |v: f64| Expr::from_f64(v).expect("validated finite");
        if t == 0.0 {
            return c(w);
        }
        let arg = if t == 1.0 { Expr::Var } else { Expr::mul(c(t), Expr::Var) };
        let e = Expr::exp(Expr::neg(arg));
        if w == 1.0 {
            e
        } else {
            Expr::mul(c(w), e)
        }
    };
    let mut it = m.atoms.iter();
    match it.next() {
        None => Expr::int(0),
        Some(first) => it.fold(term(first), |acc, a| Expr::add(acc, term(a))),
    }
}
