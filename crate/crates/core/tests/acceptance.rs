//! Acceptance suite: one PASS/FAIL line per criterion, run in a fixed order.
//!
//! Built with `harness = false`; exits nonzero when any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use monolab::bruno::{compose_nth, enumerate_partitions};
use monolab::expr::{make_f, parse, Binding, Expr};
use monolab::falpha::{
    concordance, concordance_grid, log_deriv1, log_deriv2, p_kernel, q_kernel, shifted_cm_check,
    theta, ParamPoint,
};
use monolab::interval::Interval;
use monolab::jets::lift;
use monolab::laplace::{log_f2_integral, power_identity_check, standard_power_cases, STANDARD_TRIPLES};
use monolab::mono::{
    check_class, verify_inclusion, ClassSpec, GridSpec, InclusionVariant, Tolerance, Verdict,
};
use monolab::Real;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const P: usize = 256;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn r(v: f64) -> Real {
    Real::from_f64(v, P)
}

fn subst(g: &Expr, h: &Expr) -> Expr {
    let s = |e: &Expr| Box::new(subst(e, h));
    match g {
        Expr::Var => h.clone(),
        Expr::Const(_) | Expr::Param(_) => g.clone(),
        Expr::Add(a, b) => Expr::Add(s(a), s(b)),
        Expr::Sub(a, b) => Expr::Sub(s(a), s(b)),
        Expr::Mul(a, b) => Expr::Mul(s(a), s(b)),
        Expr::Div(a, b) => Expr::Div(s(a), s(b)),
        Expr::Pow(a, b) => Expr::Pow(s(a), s(b)),
        Expr::Neg(a) => Expr::Neg(s(a)),
        Expr::Exp(a) => Expr::Exp(s(a)),
        Expr::Ln(a) => Expr::Ln(s(a)),
    }
}

fn random_poly(rng: &mut ChaCha8Rng) -> Expr {
    let deg = rng.gen_range(1..=4);
    let mut e = Expr::int(rng.gen_range(-8..=8));
    for k in 1..=deg {
        let mut c = rng.gen_range(-16..=16);
        if k == deg && c == 0 {
            c = 5;
        }
        let coef = Expr::constant(BigRational::new(c.into(), 8.into()));
        e = Expr::add(e, Expr::mul(coef, Expr::pow(Expr::Var, Expr::int(k))));
    }
    e
}

fn random_factor(rng: &mut ChaCha8Rng) -> Expr {
    match rng.gen_range(0..3) {
        0 => Expr::exp(Expr::Var),
        1 => Expr::ln(Expr::add(Expr::int(1), Expr::Var)),
        _ => random_poly(rng),
    }
}

fn faa_di_bruno_oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let b = Binding::new(P).unwrap();
    let tiny = Real::pow2(-200, P);
    let mut worst = 0.0f64;
    let mut done = 0;
    let mut comparisons = 0;
    while done < 50 {
        let g = random_factor(&mut rng);
        let h = random_factor(&mut rng);
        let x0 = r(rng.gen_range(-16..=16) as f64 / 32.0);
        let n = rng.gen_range(1..=8);
        let Ok(hj) = lift(&h, &x0, n, &b) else { continue };
        let Ok(gj) = lift(&g, hj.value(), n, &b) else { continue };
        let Ok(direct) = lift(&subst(&g, &h), &x0, n, &b) else { continue };
        let (gd, hd, dd) = (gj.derivatives(), hj.derivatives(), direct.derivatives());
        for k in 0..=n {
            let via = compose_nth(&gd, &hd, k).unwrap();
            let scale = Real::max(&via.abs(), &dd[k].abs());
            let err = if scale < tiny {
                0.0
            } else {
                (&(&via - &dd[k]).abs() / &scale).to_f64()
            };
            worst = worst.max(err);
            comparisons += 1;
        }
        done += 1;
    }
    outcome(worst <= 1e-30, format!("50 compositions, {comparisons} orders, worst relative error {worst:e}"))
}

/// Partitions of `n` with parts at most `max`, by exhaustive recursion.
fn brute_partitions(n: usize, max: usize) -> usize {
    if n == 0 {
        return 1;
    }
    (1..=max.min(n)).map(|part| brute_partitions(n - part, part)).sum()
}

fn partition_counts() -> Outcome {
    let mut bad = Vec::new();
    for n in 1..=16 {
        let got = enumerate_partitions(n).unwrap().len();
        let want = brute_partitions(n, n);
        if got != want {
            bad.push(format!("n={n}: {got} vs {want}"));
        }
    }
    let ten = enumerate_partitions(10).unwrap().len();
    let sixteen = enumerate_partitions(16).unwrap().len();
    let ok = bad.is_empty() && ten == 42 && sixteen == 231;
    outcome(ok, format!("n<=16 match oracle, p(10)={ten}, p(16)={sixteen} {}", bad.join("; ")))
}

fn inclusion_mechanism(variant: InclusionVariant, cases: &[(Expr, Binding, Interval)]) -> Outcome {
    let tol = Tolerance::for_precision(P);
    let grid = GridSpec::Exponents(vec![-2, -1, 0, 1, 2]);
    let mut ok = true;
    let mut worst = 0.0f64;
    let mut min_term = f64::INFINITY;
    let mut rows = 0;
    for (e, b, iv) in cases {
        let rep = verify_inclusion(e, b, iv, variant, 6, &grid, &tol).unwrap();
        for row in &rep.rows {
            ok &= row.hypothesis_holds && row.terms_ok && row.rel_error <= 1e-25;
            worst = worst.max(row.rel_error);
            min_term = min_term.min(row.min_term);
            rows += 1;
        }
    }
    outcome(
        ok,
        format!("{rows} (point, order) rows, smallest term {min_term:e}, worst total mismatch {worst:e}"),
    )
}

fn f_case(a: f64, b: f64, left: bool) -> (Expr, Binding, Interval) {
    let f = make_f(&r(a), &r(b), false, P).unwrap();
    let iv = if left { f.left } else { f.right };
    (f.expr, f.binding, iv)
}

fn log_cm_terms_nonnegative() -> Outcome {
    let exp_neg = (parse("exp(-x)").unwrap(), Binding::new(P).unwrap(), Interval::positive_half_line());
    inclusion_mechanism(
        InclusionVariant::LcmToCm,
        &[exp_neg, f_case(1.0, 1.0, false), f_case(-1.0, -1.5, false)],
    )
}

fn log_am_terms_nonnegative() -> Outcome {
    let exp_pos = (parse("exp(x)").unwrap(), Binding::new(P).unwrap(), Interval::new(-1.0, 1.0).unwrap());
    inclusion_mechanism(
        InclusionVariant::LamToAm,
        &[exp_pos, f_case(-1.0, 2.0, true), f_case(1.0, 0.0, true)],
    )
}

fn classification_concordance() -> Outcome {
    let tol = Tolerance::for_precision(P);
    let grid = concordance_grid();
    let mut agree = 0;
    let mut total = 0;
    let mut misses = Vec::new();
    for &(a, b) in &grid {
        let p = ParamPoint::from_f64(a, b, P).unwrap();
        for row in concordance(&p, 8, &GridSpec::Standard, &tol).unwrap() {
            total += 1;
            if row.agrees {
                agree += 1;
            } else {
                misses.push(format!("({a},{b}) item{} {}", row.item, row.subject.label()));
            }
        }
    }
    outcome(
        agree == total,
        format!("{} parameter points, {agree}/{total} items agree {}", grid.len(), misses.join(", ")),
    )
}

fn kernel_and_threshold_limits() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    let mut check = |name: String, value: f64, target: f64, tol: f64| {
        let gap = (value - target).abs();
        let pass = gap <= tol;
        ok &= pass;
        lines.push(format!("{}{name}={value:.9} (target {target}, gap {gap:.1e})", if pass { "" } else { "!" }));
    };
    for u in [-1e-8, 1e-8] {
        check(format!("q({u})"), q_kernel(&r(u)).to_f64(), 0.5, 1e-6);
        check(format!("p({u})"), p_kernel(&r(u)).to_f64(), -0.5, 1e-6);
    }
    check("q(-50)".into(), q_kernel(&r(-50.0)).to_f64(), 1.0, 1e-6);
    check("q(50)".into(), q_kernel(&r(50.0)).to_f64(), 0.0, 1e-6);
    check("p(-50)".into(), p_kernel(&r(-50.0)).to_f64(), 0.0, 1e-6);
    check("p(50)".into(), p_kernel(&r(50.0)).to_f64(), -1.0, 1e-6);
    for a in [-1.0, 1.0] {
        check(format!("theta_{a}(1e8)"), theta(&r(a), &r(1e8)).unwrap().to_f64(), a / 2.0, 1e-6);
    }
    let near = &r(1.0) + &Real::pow10(-8, P);
    check("theta_-1(1+1e-8)".into(), theta(&r(-1.0), &near).unwrap().to_f64(), -1.0, 1e-3);
    for x in [1e8, -1e8] {
        let p = ParamPoint::from_f64(1.0, 1.0, P).unwrap();
        check(format!("lnF'({x})"), log_deriv1(&p, &r(x)).unwrap().to_f64(), 0.0, 1e-6);
        check(format!("lnF''({x})"), log_deriv2(&p, &r(x)).unwrap().to_f64(), 0.0, 1e-6);
    }
    outcome(ok, lines.join("; "))
}

fn integral_representations() -> Outcome {
    let mut ok = true;
    let mut worst_int = 0.0f64;
    for (a, b, x) in STANDARD_TRIPLES {
        let p = ParamPoint::from_f64(a, b, P).unwrap();
        let c = log_f2_integral(&p, &r(x)).unwrap();
        ok &= c.error <= 1e-8;
        worst_int = worst_int.max(c.error);
    }
    let mut worst_pow = 0.0f64;
    for (x, rr) in standard_power_cases() {
        let t = power_identity_check(&r(x), &r(rr)).unwrap();
        ok &= t.error <= 1e-8;
        worst_pow = worst_pow.max(t.error);
    }
    outcome(
        ok,
        format!("10 triples worst {worst_int:e}; 9 power identities worst {worst_pow:e}"),
    )
}

fn shifted_complete_monotonicity() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (a, b) in [(1.0, 1.0), (1.0, -1.0), (-1.0, -2.0)] {
        let rep = shifted_cm_check(&ParamPoint::from_f64(a, b, P).unwrap(), &GridSpec::Standard, 8).unwrap();
        for e in &rep.entries {
            ok &= e.agrees;
            parts.push(format!(
                "({a},{b}) {}: {:?}{}",
                e.subject,
                e.verdict.verdict,
                if e.agrees { "" } else { " MISMATCH" }
            ));
        }
        ok &= rep.limit.passed;
        parts.push(format!("({a},{b}) F(1e8)/e^a-1={:.1e}", rep.limit.rel_error));
    }
    outcome(ok, parts.join("; "))
}

fn strict_inclusion_witnesses() -> Outcome {
    let b = Binding::new(P).unwrap();
    let tol = Tolerance::for_precision(P);
    let iv = Interval::positive_half_line();
    let sweep = |s: &str, c: ClassSpec| check_class(&parse(s).unwrap(), &b, &iv, c, 8, &GridSpec::Standard, &tol).unwrap();
    let am = sweep("1+x", ClassSpec::Am);
    let lam = sweep("1+x", ClassSpec::Lam);
    let cm = sweep("0", ClassSpec::Cm);
    let lcm = sweep("0", ClassSpec::Lcm);
    let order = lam.witness.as_ref().map(|w| w.order);
    let ok = am.verdict == Verdict::Consistent
        && lam.verdict == Verdict::Refuted
        && order == Some(2)
        && cm.verdict == Verdict::Consistent
        && lcm.verdict == Verdict::Inapplicable;
    outcome(
        ok,
        format!(
            "1+x: am {:?}, lam {:?} (witness order {:?}); 0: cm {:?}, lcm {:?}",
            am.verdict, lam.verdict, order, cm.verdict, lcm.verdict
        ),
    )
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);
    let criteria: [Criterion; 9] = [
        ("faa_di_bruno_oracle_equivalence", faa_di_bruno_oracle_equivalence, Some(Duration::from_secs(10))),
        ("partition_counts", partition_counts, Some(Duration::from_secs(1))),
        ("log_cm_terms_nonnegative", log_cm_terms_nonnegative, Some(Duration::from_secs(10))),
        ("log_am_terms_nonnegative", log_am_terms_nonnegative, Some(Duration::from_secs(10))),
        ("classification_concordance", classification_concordance, Some(Duration::from_secs(300))),
        ("kernel_and_threshold_limits", kernel_and_threshold_limits, None),
        ("integral_representations", integral_representations, Some(Duration::from_secs(30))),
        ("shifted_complete_monotonicity", shifted_complete_monotonicity, None),
        ("strict_inclusion_witnesses", strict_inclusion_witnesses, None),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run));
        let elapsed = start.elapsed();
        let (passed, detail) = match result {
            Ok(o) => (o.passed, o.detail),
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            }
        };
        let in_time = budget.is_none_or(|b| elapsed <= b);
        let ok = passed && in_time;
        if !ok {
            failed += 1;
        }
        let budget_note = match budget {
            Some(b) => format!(" (budget {}s{})", b.as_secs(), if in_time { "" } else { ", exceeded" }),
            None => String::new(),
        };
        println!(
            "{} {:>2} {name} [{:.2}s{budget_note}] {detail}",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
