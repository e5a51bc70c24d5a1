//! Command-line front end.
//!
//! Exit status: 0 success, 1 a check disagreed with the expected outcome,
//! 2 configuration error, 3 evaluation error (the report is still written
//! when one exists).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bruno::{bruno_terms, format_terms};
use crate::error::{Error, Result};
use crate::expr::{parse, Binding, Expr};
use crate::falpha::{
    classify, concordance, concordance_grid, off_boundary, shifted_cm_check, ParamPoint,
    RegionReport, Subject,
};
use crate::interval::Interval;
use crate::laplace::{log_f2_integral, power_identity_check, standard_power_cases, STANDARD_TRIPLES};
use crate::mono::{
    check_class, verify_inclusion, ClassSpec, ClassVerdict, GridSpec, InclusionVariant, Tolerance,
    Verdict,
};
use crate::real::{Real, DEFAULT_PRECISION, MIN_PRECISION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DISCREPANCY: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClassArg {
    Cm,
    Am,
    Lcm,
    Lam,
}

impl From<ClassArg> for ClassSpec {
    fn from(c: ClassArg) -> ClassSpec {
        match c {
            ClassArg::Cm => ClassSpec::Cm,
            ClassArg::Am => ClassSpec::Am,
            ClassArg::Lcm => ClassSpec::Lcm,
            ClassArg::Lam => ClassSpec::Lam,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "monolab", version, about = "Monotonicity classes of (1+a/x)^(x+b) and friends")]
pub struct RunConfig {
    /// Working precision in bits.
    #[arg(long, global = true, env = "MONOLAB_PRECISION", default_value_t = DEFAULT_PRECISION)]
    pub precision: usize,

    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sign sweep of one class on one interval.
    Check {
        #[arg(long, conflicts_with = "expr_file", required_unless_present = "expr_file")]
        expr: Option<String>,
        #[arg(long)]
        expr_file: Option<PathBuf>,
        /// Parameter binding `name=value`, repeatable.
        #[arg(long = "param", value_name = "NAME=VALUE")]
        params: Vec<String>,
        #[arg(long, value_enum)]
        class: ClassArg,
        #[arg(long, default_value = "(0,inf)")]
        interval: String,
        #[arg(long, default_value_t = 8)]
        max_order: usize,
        /// `standard`, `exponents:j1,j2,..` or `points:x1,x2,..`
        #[arg(long, default_value = "standard")]
        grid: String,
    },
    /// The eight membership conditions at one (alpha, beta).
    Classify {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
    },
    /// `classify` over a range of beta.
    RegionMap {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        /// `lo:hi:step`
        #[arg(long, allow_hyphen_values = true)]
        beta_range: String,
    },
    /// Faa di Bruno term table for order n.
    Bruno {
        #[arg(long)]
        n: usize,
    },
    /// Runs the inclusion, classification and shifted-CM suites.
    VerifyTheorems {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Skip the full concordance grid (random points only).
        #[arg(long)]
        quick: bool,
    },
    /// Quadrature against closed forms; without arguments runs the standard set.
    VerifyIntegrals {
        #[arg(long, allow_hyphen_values = true, requires_all = ["beta", "x"])]
        alpha: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        x: Option<f64>,
    },
}

/// Entry point used by the binary.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with_args(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match RunConfig::try_parse_from(args) {
        Ok(cfg) => run(&cfg, out, err),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            code
        }
    }
}

/// A rendered report plus the exit status it implies.
pub struct Outcome {
    pub body: String,
    pub status: i32,
}

pub fn run(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let outcome = match execute(cfg) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return exit_code(&e);
        }
    };
    let written = match &cfg.output {
        Some(path) => fs::write(path, outcome.body.as_bytes()).map_err(|e| e.to_string()),
        None => out.write_all(outcome.body.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        let _ = writeln!(err, "error: cannot write report: {e}");
        return EXIT_CONFIG;
    }
    outcome.status
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_)
        | Error::Config(_)
        | Error::InvalidParameter(_)
        | Error::UnboundParameter(_)
        | Error::OrderTooLarge { .. } => EXIT_CONFIG,
        Error::Domain(_)
        | Error::DivisionByZero
        | Error::NearSingular(_)
        | Error::NonPositiveValue(_)
        | Error::Pole(_)
        | Error::Branch { .. } => EXIT_DOMAIN,
        Error::MismatchedJets
        | Error::InsufficientDerivatives { .. }
        | Error::QuadratureNonConvergence(_) => EXIT_DISCREPANCY,
    }
}

fn pick_format(requested: Option<Format>, default: Format, allowed: &[Format]) -> Result<Format> {
    let f = requested.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(Error::Config(format!("format {f:?} is not supported by this command")))
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

/// Tags a report with its kind for schema dispatch.
#[derive(Serialize)]
struct Tagged<'a, T: Serialize> {
    kind: &'static str,
    precision: usize,
    #[serde(flatten)]
    body: &'a T,
}

fn tagged<T: Serialize>(kind: &'static str, precision: usize, body: &T) -> String {
    to_json(&Tagged { kind, precision, body })
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    let prec = cfg.precision;
    if prec < MIN_PRECISION {
        return Err(Error::Config(format!("precision {prec} is below {MIN_PRECISION} bits")));
    }
    match &cfg.command {
        Command::Check { expr, expr_file, params, class, interval, max_order, grid } => {
            let fmt = pick_format(cfg.format, Format::Json, &[Format::Json, Format::Text])?;
            let text = match (expr, expr_file) {
                (Some(e), _) => e.clone(),
                (None, Some(path)) => fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?,
                (None, None) => return Err(Error::Config("--expr or --expr-file is required".into())),
            };
            let e = parse(text.trim())?;
            let binding = parse_params(params, prec)?;
            let interval: Interval = interval.parse()?;
            let grid = parse_grid(grid)?;
            let v = check_class(
                &e,
                &binding,
                &interval,
                (*class).into(),
                *max_order,
                &grid,
                &Tolerance::for_precision(prec),
            )?;
            let status = if v.verdict == Verdict::Inapplicable { EXIT_DOMAIN } else { EXIT_OK };
            let body = match fmt {
                Format::Json => tagged("class_verdict", prec, &v),
                _ => verdict_text(&e, &v),
            };
            Ok(Outcome { body, status })
        }
        Command::Classify { alpha, beta } => {
            let fmt = pick_format(cfg.format, Format::Json, &[Format::Json, Format::Text])?;
            let rep = classify(&ParamPoint::from_f64(*alpha, *beta, prec)?)?;
            let body = match fmt {
                Format::Json => tagged("region_report", prec, &rep),
                _ => region_text(&rep),
            };
            Ok(Outcome { body, status: EXIT_OK })
        }
        Command::RegionMap { alpha, beta_range } => {
            let fmt = pick_format(cfg.format, Format::Csv, &[Format::Csv, Format::Json])?;
            let betas = parse_range(beta_range)?;
            let reports = region_map(*alpha, &betas, prec)?;
            let body = match fmt {
                Format::Csv => region_csv(&reports)?,
                _ => tagged("region_map", prec, &RegionMap { rows: &reports }),
            };
            Ok(Outcome { body, status: EXIT_OK })
        }
        Command::Bruno { n } => {
            let fmt = pick_format(cfg.format, Format::Text, &[Format::Text, Format::Json])?;
            let body = match fmt {
                Format::Text => format_terms(*n)?,
                _ => tagged("bruno", prec, &BrunoTable { n: *n, terms: bruno_terms(*n)? }),
            };
            Ok(Outcome { body, status: EXIT_OK })
        }
        Command::VerifyTheorems { seed, quick } => {
            let fmt = pick_format(cfg.format, Format::Text, &[Format::Text, Format::Json])?;
            let rep = verify_theorems(*seed, prec, !*quick)?;
            let status = if rep.passed { EXIT_OK } else { EXIT_DISCREPANCY };
            let body = match fmt {
                Format::Text => rep.to_text(),
                _ => tagged("theorem_report", prec, &rep),
            };
            Ok(Outcome { body, status })
        }
        Command::VerifyIntegrals { alpha, beta, x } => {
            let fmt = pick_format(cfg.format, Format::Text, &[Format::Text, Format::Json])?;
            let triples: Vec<(f64, f64, f64)> = match (alpha, beta, x) {
                (Some(a), Some(b), Some(x)) => vec![(*a, *b, *x)],
                (None, None, None) => STANDARD_TRIPLES.to_vec(),
                _ => return Err(Error::Config("--alpha, --beta and --x go together".into())),
            };
            let with_power = alpha.is_none();
            let rep = verify_integrals(&triples, with_power, prec)?;
            let status = if rep.passed { EXIT_OK } else { EXIT_DISCREPANCY };
            let body = match fmt {
                Format::Text => rep.to_text(),
                _ => tagged("integral_report", prec, &rep),
            };
            Ok(Outcome { body, status })
        }
    }
}

fn parse_params(params: &[String], prec: usize) -> Result<Binding> {
    let mut b = Binding::new(prec)?;
    for p in params {
        let (name, value) = p
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("parameter `{p}` is not NAME=VALUE")))?;
        let name = name.trim();
        let valid = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
            && !matches!(name, "x" | "exp" | "ln");
        if !valid {
            return Err(Error::Config(format!("bad parameter name `{name}`")));
        }
        // parameter values accept the expression grammar (constants only)
        let e = parse(value.trim())?;
        if e.depends_on_x() || !e.params().is_empty() {
            return Err(Error::Config(format!("parameter `{name}` must be a constant")));
        }
        let v = crate::expr::eval(&e, &Real::zero(prec), &Binding::new(prec)?)?;
        b.set(name, v);
    }
    Ok(b)
}

pub fn parse_grid(s: &str) -> Result<GridSpec> {
    let s = s.trim();
    if s == "standard" {
        return Ok(GridSpec::Standard);
    }
    let bad = || Error::Config(format!("bad grid `{s}` (standard, exponents:.., points:..)"));
    let (kind, list) = s.split_once(':').ok_or_else(bad)?;
    let items: Vec<&str> = list.split(',').map(str::trim).filter(|t| !t.is_empty()).collect();
    if items.is_empty() {
        return Err(bad());
    }
    match kind {
        "exponents" => items
            .iter()
            .map(|t| t.parse::<i32>().map_err(|_| bad()))
            .collect::<Result<_>>()
            .map(GridSpec::Exponents),
        "points" => items
            .iter()
            .map(|t| t.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(bad))
            .collect::<Result<_>>()
            .map(GridSpec::Points),
        _ => Err(bad()),
    }
}

/// `lo:hi:step` to the inclusive list `lo, lo+step, ..`.
pub fn parse_range(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("bad range `{s}` (lo:hi:step)"));
    let parts: Vec<f64> = s
        .split(':')
        .map(|t| t.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(bad))
        .collect::<Result<_>>()?;
    let [lo, hi, step] = parts[..] else { return Err(bad()) };
    if step <= 0.0 || hi < lo {
        return Err(bad());
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    if n > 1_000_000 {
        return Err(Error::Config(format!("range `{s}` has too many points")));
    }
    Ok((0..=n).map(|i| lo + step * i as f64).collect())
}

pub fn region_map(alpha: f64, betas: &[f64], prec: usize) -> Result<Vec<RegionReport>> {
    betas
        .par_iter()
        .map(|&b| classify(&ParamPoint::from_f64(alpha, b, prec)?))
        .collect()
}

#[derive(Serialize)]
struct RegionMap<'a> {
    rows: &'a [RegionReport],
}

#[derive(Serialize)]
struct BrunoTable<'a> {
    n: usize,
    terms: &'a [crate::bruno::BrunoTerm],
}

pub fn region_csv(reports: &[RegionReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["alpha".to_string(), "beta".to_string()];
    for item in 1..=4 {
        for s in [Subject::F, Subject::InvF] {
            header.push(format!("item{item}_{}", s.tag()));
        }
    }
    header.push("boundary".into());
    let csv_err = |e: csv::Error| Error::Config(format!("csv: {e}"));
    w.write_record(&header).map_err(csv_err)?;
    for rep in reports {
        let mut row = vec![rep.alpha.to_string(), rep.beta.to_string()];
        for item in 1..=4u8 {
            for s in [Subject::F, Subject::InvF] {
                row.push(match rep.entry(item, s).holds {
                    Some(true) => "true".into(),
                    Some(false) => "false".into(),
                    None => "na".into(),
                });
            }
        }
        row.push(rep.any_boundary().to_string());
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn verdict_text(e: &Expr, v: &ClassVerdict) -> String {
    let mut s = format!(
        "{} {} on {}: {:?} ({} points, orders {}..={})\n",
        e,
        v.class.name(),
        v.interval,
        v.verdict,
        v.sample_count,
        v.class.first_order(),
        v.max_order
    )
    .to_lowercase();
    if let Some(w) = &v.witness {
        s.push_str(&format!(
            "witness: order {} at x = {}, value {:e}, threshold {:e}\n",
            w.order, w.x, w.value, w.threshold
        ));
    }
    if let (Some(x), Some(note)) = (v.offending_point, &v.note) {
        s.push_str(&format!("not evaluable at x = {x}: {note}\n"));
    }
    s
}

fn region_text(rep: &RegionReport) -> String {
    let mut s = format!("alpha = {}, beta = {}\n", rep.alpha, rep.beta);
    for e in rep.applicable() {
        s.push_str(&format!(
            "item{} {:<3} {} on {}  {:<12} {}{}\n",
            e.item,
            e.subject.label(),
            e.class.name(),
            e.interval.expect("applicable"),
            e.condition.text(),
            if e.holds == Some(true) { "holds" } else { "fails" },
            if e.boundary == Some(true) { " (boundary)" } else { "" }
        ));
    }
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct Assertion {
    pub suite: String,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremReport {
    pub seed: u64,
    pub assertions: Vec<Assertion>,
    pub passed: bool,
}

impl TheoremReport {
    pub fn to_text(&self) -> String {
        let mut s = format!("seed: {}\n", self.seed);
        for a in &self.assertions {
            s.push_str(&format!(
                "{} [{}] {}: {}\n",
                if a.passed { "PASS" } else { "FAIL" },
                a.suite,
                a.name,
                a.detail
            ));
        }
        let failed = self.assertions.iter().filter(|a| !a.passed).count();
        s.push_str(&format!("{} assertions, {} failed\n", self.assertions.len(), failed));
        s
    }
}

fn inclusion_assertion(
    suite: &str,
    name: String,
    e: &Expr,
    b: &Binding,
    iv: &Interval,
    variant: InclusionVariant,
    grid: &GridSpec,
) -> Result<Assertion> {
    let tol = Tolerance::for_precision(b.precision());
    let rep = verify_inclusion(e, b, iv, variant, 6, grid, &tol)?;
    let hyp = rep.rows.iter().all(|r| r.hypothesis_holds);
    let terms = rep.rows.iter().all(|r| r.terms_ok);
    let worst = rep.rows.iter().map(|r| r.rel_error).fold(0.0, f64::max);
    Ok(Assertion {
        suite: suite.into(),
        name,
        passed: rep.passed && hyp && terms,
        detail: format!(
            "{} rows, hypothesis {}, terms nonnegative {}, worst total mismatch {:e}",
            rep.rows.len(),
            hyp,
            terms,
            worst
        ),
    })
}

/// Five points inside `iv`, log-spread from the finite endpoint.
fn random_points(rng: &mut ChaCha8Rng, iv: &Interval) -> Vec<f64> {
    (0..5)
        .map(|_| {
            let off = 10f64.powf(rng.gen_range(-2.0..2.0));
            if iv.lo.is_finite() {
                iv.lo + off
            } else {
                iv.hi - off
            }
        })
        .collect()
}

fn random_param(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let a = [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0][rng.gen_range(0..6)] * rng.gen_range(0.8..1.25);
    let b = rng.gen_range(-3.0..3.0);
    ((a * 64.0f64).round() / 64.0, (b * 64.0f64).round() / 64.0)
}

/// The full assertion suite; `full_grid` adds the whole concordance grid.
pub fn verify_theorems(seed: u64, prec: usize, full_grid: bool) -> Result<TheoremReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let b0 = Binding::new(prec)?;
    let pt = |a: f64, b: f64| ParamPoint::from_f64(a, b, prec);
    let five = GridSpec::Exponents(vec![-2, -1, 0, 1, 2]);

    // LAM implies AM
    let f = |a: f64, b: f64| pt(a, b).and_then(|p| p.function(false));
    out.push(inclusion_assertion(
        "lam=>am",
        "exp(x) on (-1,1)".into(),
        &parse("exp(x)")?,
        &b0,
        &Interval::new(-1.0, 1.0)?,
        InclusionVariant::LamToAm,
        &GridSpec::Points(vec![-0.9, -0.5, 0.0, 0.5, 0.9]),
    )?);
    for (a, b) in [(-1.0, 2.0), (1.0, 0.0)] {
        let ff = f(a, b)?;
        out.push(inclusion_assertion(
            "lam=>am",
            format!("F({a},{b}) on {}", ff.left),
            &ff.expr,
            &ff.binding,
            &ff.left,
            InclusionVariant::LamToAm,
            &five,
        )?);
    }
    // LCM implies CM
    out.push(inclusion_assertion(
        "lcm=>cm",
        "exp(-x) on (0,inf)".into(),
        &parse("exp(-x)")?,
        &b0,
        &Interval::positive_half_line(),
        InclusionVariant::LcmToCm,
        &five,
    )?);
    for (a, b) in [(1.0, 1.0), (-1.0, -1.5)] {
        let ff = f(a, b)?;
        out.push(inclusion_assertion(
            "lcm=>cm",
            format!("F({a},{b}) on {}", ff.right),
            &ff.expr,
            &ff.binding,
            &ff.right,
            InclusionVariant::LcmToCm,
            &five,
        )?);
    }
    // random members of the log classes
    for variant in [InclusionVariant::LcmToCm, InclusionVariant::LamToAm] {
        let class = match variant {
            InclusionVariant::LcmToCm => ClassSpec::Lcm,
            InclusionVariant::LamToAm => ClassSpec::Lam,
        };
        let mut found = 0;
        while found < 3 {
            let (a, b) = random_param(&mut rng);
            let rep = classify(&pt(a, b)?)?;
            let Some(entry) = rep
                .applicable()
                .find(|e| e.class == class && e.holds == Some(true))
            else {
                continue;
            };
            found += 1;
            let ff = pt(a, b)?.function(entry.subject == Subject::InvF)?;
            let iv = entry.interval.expect("applicable");
            let grid = GridSpec::Points(random_points(&mut rng, &iv));
            out.push(inclusion_assertion(
                if class == ClassSpec::Lcm { "lcm=>cm" } else { "lam=>am" },
                format!("random {}({a},{b}) on {iv}", entry.subject.label()),
                &ff.expr,
                &ff.binding,
                &iv,
                variant,
                &grid,
            )?);
        }
    }

    // classification concordance
    let tol = Tolerance::for_precision(prec);
    let mut params: Vec<(f64, f64)> = if full_grid { concordance_grid() } else { Vec::new() };
    let mut extra = 0;
    while extra < 6 {
        let (a, b) = random_param(&mut rng);
        if off_boundary(a, b) {
            params.push((a, b));
            extra += 1;
        }
    }
    let rows: Vec<Vec<Assertion>> = params
        .par_iter()
        .map(|&(a, b)| {
            let rows = concordance(&pt(a, b)?, 8, &GridSpec::Standard, &tol)?;
            Ok(rows
                .into_iter()
                .map(|r| Assertion {
                    suite: "classification".into(),
                    name: format!("alpha={a} beta={b} item{} {}", r.item, r.subject.label()),
                    passed: r.agrees,
                    detail: format!(
                        "{} predicted {}, sweep {:?}",
                        r.condition,
                        if r.predicted { "member" } else { "non-member" },
                        r.verdict.verdict
                    )
                    .to_lowercase(),
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    out.extend(rows.into_iter().flatten());

    // shifted complete monotonicity
    for (a, b) in [(1.0, 1.0), (1.0, -1.0), (-1.0, -2.0)] {
        let rep = shifted_cm_check(&pt(a, b)?, &GridSpec::Standard, 8)?;
        for e in &rep.entries {
            out.push(Assertion {
                suite: "shifted-cm".into(),
                name: format!("alpha={a} beta={b} {} on {}", e.subject, e.interval),
                passed: e.agrees,
                detail: format!(
                    "{} {}, sweep {:?}",
                    e.condition,
                    if e.expected { "holds" } else { "fails" },
                    e.verdict.verdict
                )
                .to_lowercase(),
            });
        }
        out.push(Assertion {
            suite: "shifted-cm".into(),
            name: format!("alpha={a} beta={b} F(x) -> e^alpha"),
            passed: rep.limit.passed,
            detail: format!("relative gap {:e} at x = {}", rep.limit.rel_error, rep.limit.x),
        });
    }

    // strict inclusions
    let sweep = |s: &str, class: ClassSpec| -> Result<ClassVerdict> {
        check_class(&parse(s)?, &b0, &Interval::positive_half_line(), class, 8, &GridSpec::Standard, &tol)
    };
    let am = sweep("1+x", ClassSpec::Am)?;
    let lam = sweep("1+x", ClassSpec::Lam)?;
    out.push(Assertion {
        suite: "strict-inclusion".into(),
        name: "1+x in AM but not LAM on (0,inf)".into(),
        passed: am.verdict == Verdict::Consistent
            && lam.verdict == Verdict::Refuted
            && lam.witness.as_ref().map(|w| w.order) == Some(2),
        detail: format!("am {:?}, lam {:?}", am.verdict, lam.verdict).to_lowercase(),
    });
    let cm = sweep("0", ClassSpec::Cm)?;
    let lcm = sweep("0", ClassSpec::Lcm)?;
    out.push(Assertion {
        suite: "strict-inclusion".into(),
        name: "0 in CM, log class inapplicable".into(),
        passed: cm.verdict == Verdict::Consistent && lcm.verdict == Verdict::Inapplicable,
        detail: format!("cm {:?}, lcm {:?}", cm.verdict, lcm.verdict).to_lowercase(),
    });

    let passed = out.iter().all(|a| a.passed);
    Ok(TheoremReport { seed, assertions: out, passed })
}

#[derive(Debug, Clone, Serialize)]
pub struct IntegralLine {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub error: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct IntegralReport {
    pub lines: Vec<IntegralLine>,
    pub passed: bool,
}

impl IntegralReport {
    pub fn to_text(&self) -> String {
        let mut s = String::from("# name  lhs  rhs  error  status\n");
        for l in &self.lines {
            s.push_str(&format!(
                "{}  {}  {}  {:e}  {}\n",
                l.name,
                l.lhs,
                l.rhs,
                l.error,
                if l.passed { "PASS" } else { "FAIL" }
            ));
        }
        s
    }
}

pub fn verify_integrals(triples: &[(f64, f64, f64)], with_power: bool, prec: usize) -> Result<IntegralReport> {
    let mut lines: Vec<IntegralLine> = triples
        .par_iter()
        .map(|&(a, b, x)| {
            let c = log_f2_integral(&ParamPoint::from_f64(a, b, prec)?, &Real::from_f64(x, prec))?;
            Ok(IntegralLine {
                name: format!("log_f2(alpha={a},beta={b},x={x})"),
                lhs: c.integral,
                rhs: c.closed_form,
                error: c.error,
                passed: c.passed,
            })
        })
        .collect::<Result<_>>()?;
    if with_power {
        let power: Vec<IntegralLine> = standard_power_cases()
            .par_iter()
            .map(|&(x, r)| {
                let t = power_identity_check(&Real::from_f64(x, prec), &Real::from_f64(r, prec))?;
                Ok(IntegralLine {
                    name: format!("power(x={x},r={r})"),
                    lhs: t.lhs,
                    rhs: t.rhs,
                    error: t.error,
                    passed: t.passed,
                })
            })
            .collect::<Result<_>>()?;
        lines.extend(power);
    }
    let passed = lines.iter().all(|l| l.passed);
    Ok(IntegralReport { lines, passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_with_args(
            std::iter::once("monolab").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn range_parsing() {
        let r = parse_range("-2:1:0.25").unwrap();
        assert_eq!(r.len(), 13);
        assert_eq!(r[4], -1.0);
        assert!(parse_range("1:0:0.1").is_err());
        assert!(parse_range("0:1").is_err());
        assert!(parse_range("0:1:0").is_err());
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("standard").unwrap(), GridSpec::Standard);
        assert_eq!(parse_grid("points:1, 2.5").unwrap(), GridSpec::Points(vec![1.0, 2.5]));
        assert_eq!(parse_grid("exponents:-1,0").unwrap(), GridSpec::Exponents(vec![-1, 0]));
        assert!(parse_grid("points:").is_err());
        assert!(parse_grid("wide").is_err());
    }

    #[test]
    fn param_parsing() {
        let b = parse_params(&["a=1/4".into(), "b = -2".into()], 128).unwrap();
        assert_eq!(b.get("a").unwrap().to_f64(), 0.25);
        assert_eq!(b.get("b").unwrap().to_f64(), -2.0);
        assert!(parse_params(&["a".into()], 128).is_err());
        assert!(parse_params(&["x=1".into()], 128).is_err());
        assert!(parse_params(&["a=x".into()], 128).is_err());
    }

    #[test]
    fn check_exit_codes() {
        let (code, out, _) = run_args(&["check", "--expr", "exp(-x)", "--class", "cm", "--interval", "(0,inf)"]);
        assert_eq!(code, 0);
        assert!(out.contains("\"verdict\": \"consistent\""));
        let (code, _, err) = run_args(&["check", "--expr", "x+", "--class", "cm"]);
        assert_eq!(code, EXIT_CONFIG);
        assert!(err.contains("offset 2"));
        let (code, out, _) = run_args(&["check", "--expr", "ln(x)", "--class", "am", "--interval", "(-1,1)"]);
        assert_eq!(code, EXIT_DOMAIN);
        assert!(out.contains("inapplicable"));
        let (code, _, _) = run_args(&["check", "--expr", "a*x", "--class", "am"]);
        assert_eq!(code, EXIT_CONFIG);
        let (code, _, _) = run_args(&["--precision", "32", "bruno", "--n", "3"]);
        assert_eq!(code, EXIT_CONFIG);
        let (code, _, _) = run_args(&["bruno", "--n", "3", "--format", "csv"]);
        assert_eq!(code, EXIT_CONFIG);
        let (code, _, _) = run_args(&["frobnicate"]);
        assert_eq!(code, EXIT_CONFIG);
    }

    #[test]
    fn classify_json() {
        let (code, out, _) = run_args(&["classify", "--alpha", "1", "--beta", "1"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["kind"], "region_report");
        let item2 = v["entries"]
            .as_array()
            .unwrap()
            .iter()
            .find(|e| e["item"] == 2 && e["subject"] == "F")
            .unwrap();
        assert_eq!(item2["holds"], true);
    }

    #[test]
    fn region_map_flips() {
        let (code, out, _) = run_args(&["region-map", "--alpha", "-1", "--beta-range", "-2:1:0.25"]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines.len(), 14);
        assert_eq!(
            lines[0],
            "alpha,beta,item1_F,item1_invF,item2_F,item2_invF,item3_F,item3_invF,item4_F,item4_invF,boundary"
        );
        assert_eq!(lines[1], "-1,-2,true,false,na,na,false,true,na,na,false");
        assert_eq!(lines[5], "-1,-1,true,false,na,na,false,true,na,na,true");
        assert_eq!(lines[6], "-1,-0.75,false,false,na,na,false,true,na,na,false");
        assert_eq!(lines[7], "-1,-0.5,false,true,na,na,false,true,na,na,true");
        assert_eq!(lines[8], "-1,-0.25,false,true,na,na,false,false,na,na,false");
        assert_eq!(lines[9], "-1,0,false,true,na,na,true,false,na,na,true");
        assert_eq!(lines[13], "-1,1,false,true,na,na,true,false,na,na,false");
    }

    #[test]
    fn output_to_file_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("a.json");
        let p2 = dir.path().join("b.json");
        for p in [&p1, &p2] {
            let (code, out, _) = run_args(&[
                "check", "--expr", "(1+a/x)^(x+b)", "--param", "a=1", "--param", "b=1",
                "--class", "lcm", "--output", p.to_str().unwrap(),
            ]);
            assert_eq!(code, 0);
            assert!(out.is_empty());
        }
        assert_eq!(fs::read(&p1).unwrap(), fs::read(&p2).unwrap());
    }

    #[test]
    fn precision_from_environment_is_overridden_by_flag() {
        let cfg = RunConfig::try_parse_from(["monolab", "--precision", "128", "bruno", "--n", "2"]).unwrap();
        assert_eq!(cfg.precision, 128);
    }
}
