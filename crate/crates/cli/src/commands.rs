use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use gengauss::check::{check_rule, RuleCheck};
use gengauss::convergence::{self, Schedule};
use gengauss::exprcalc::{self, Expr};
use gengauss::format::{self, float};
use gengauss::measures::RecurrenceMeasure;
use gengauss::num_complex::Complex64;
use gengauss::potential::{self, Window};
use gengauss::quadrature;
use gengauss::real::{DoubleDouble, Precision};
use gengauss::rulegen::{self, GenGaussRule};
use gengauss::spline;
use gengauss::Error;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::measure_arg::{coefficients_needed, MeasureArg};

/// Everything that ends a command early, mapped onto exit codes.
#[derive(Debug)]
pub enum CliError {
    Lib(Error),
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    /// Verification ran but reported failures.
    ChecksFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ChecksFailed(_) => 1,
            CliError::Lib(Error::Numeric(_)) => 3,
            CliError::Lib(_) => 2,
            CliError::Io { .. } => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::ChecksFailed(count) => write!(f, "{count} check(s) failed"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

fn domain(msg: impl Into<String>) -> CliError {
    CliError::Lib(Error::Domain(msg.into()))
}

/// Writes to `path`, or to stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, text: &str) -> CliResult {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => stdout(text),
    }
}

/// Writes to stdout; a closed pipe on the reading side is not an error.
fn stdout(text: &str) -> CliResult {
    use std::io::Write as _;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Io {
            path: PathBuf::from("<stdout>"),
            source: e,
        }),
        _ => Ok(()),
    }
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn json<T: serde::Serialize + ?Sized>(value: &T) -> String {
    format::to_json(value).expect("plain data serializes")
}

/// Precision requested on the command line; `None` means automatic.
pub type PrecisionChoice = Option<Precision>;

fn resolve(choice: PrecisionChoice, r: usize, s: usize) -> Precision {
    choice.unwrap_or_else(|| Precision::auto(r, s))
}

fn check_in(
    m: &RecurrenceMeasure,
    a: f64,
    r: usize,
    b: f64,
    s: usize,
    n: usize,
    precision: Precision,
) -> CliResult<(GenGaussRule, RuleCheck)> {
    Ok(match precision {
        Precision::Double => {
            let rule = rulegen::build_rule_in::<f64>(m, a, r, b, s, n)?;
            let report = check_rule(m, &rule)?;
            (rule, report)
        }
        Precision::DoubleDouble => {
            let rule = rulegen::build_rule_in::<DoubleDouble>(m, a, r, b, s, n)?;
            let report = check_rule(m, &rule)?;
            (rule.to_f64(), report)
        }
    })
}

fn summary(report: &RuleCheck) -> String {
    let verdict = |ok: bool| if ok { "ok" } else { "FAILED" };
    let mut out = String::new();
    let _ = writeln!(
        out,
        "positivity: {} (min weight {:e})",
        verdict(report.positive),
        report.min_weight
    );
    let _ = writeln!(
        out,
        "exactness: {} (max relative defect {:e})",
        verdict(report.exact),
        report.exactness_defect
    );
    let _ = writeln!(
        out,
        "leading-error identity: {} (relative gap {:e})",
        verdict(report.identity_holds),
        report.identity_rel
    );
    match report.norm_bound {
        Some(bound) => {
            let _ = writeln!(
                out,
                "norm bound: {} ({:e} <= {:e})",
                verdict(report.norm_within_bound),
                report.norm_estimate,
                bound
            );
        }
        None => {
            let _ = writeln!(out, "norm bound: n/a (unbounded interval)");
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

pub struct RuleArgs<'a> {
    pub measure: &'a MeasureArg,
    pub a: Option<f64>,
    pub r: usize,
    pub b: Option<f64>,
    pub s: usize,
    pub n: usize,
}

impl RuleArgs<'_> {
    fn endpoints(&self) -> (f64, f64) {
        let (lo, hi) = self.measure.support();
        (self.a.unwrap_or(lo), self.b.unwrap_or(hi))
    }

    fn build_measure(&self) -> CliResult<RecurrenceMeasure> {
        Ok(self
            .measure
            .build(coefficients_needed(self.n, self.r, self.s))?)
    }
}

pub fn cmd_rule(
    args: &RuleArgs,
    precision: PrecisionChoice,
    fmt: OutputFormat,
    out: Option<&Path>,
) -> CliResult {
    let m = args.build_measure()?;
    let (a, b) = args.endpoints();
    let (rule, report) = check_in(
        &m,
        a,
        args.r,
        b,
        args.s,
        args.n,
        resolve(precision, args.r, args.s),
    )?;
    let text = match fmt {
        OutputFormat::Json => json(&rule),
        OutputFormat::Csv => format::rule_csv(&rule),
    };
    emit(out, &text)?;
    eprint!("{}", summary(&report));
    Ok(())
}

pub struct SweepArgs {
    pub n_min: usize,
    pub n_max: usize,
    pub r_max: usize,
    pub s_max: usize,
    pub sample: Option<usize>,
    pub seed: u64,
}

const TABLE_HEADER: &str =
    "    n    r    s    min_weight          exact_defect  identity_gap  norm/bound  status";

fn table_row(report: &RuleCheck) -> String {
    let ratio = report
        .norm_bound
        .map(|bound| format!("{:.4}", report.norm_estimate / bound))
        .unwrap_or_else(|| "n/a".into());
    format!(
        "{:5}{:5}{:5}  {:<18.10e}  {:<12.3e}  {:<12.3e}  {:<10}  {}",
        report.n,
        report.r,
        report.s,
        report.min_weight,
        report.exactness_defect,
        report.identity_rel,
        ratio,
        if report.passed() { "pass" } else { "FAIL" }
    )
}

pub fn cmd_check_sweep(
    measure: &MeasureArg,
    sweep: &SweepArgs,
    precision: PrecisionChoice,
    out: Option<&Path>,
) -> CliResult {
    let mut triples = Vec::new();
    for n in sweep.n_min..=sweep.n_max {
        for r in 0..=sweep.r_max {
            for s in 0..=sweep.s_max {
                if n + r + s > 0 {
                    triples.push((n, r, s));
                }
            }
        }
    }
    if let Some(k) = sweep.sample {
        let mut rng = ChaCha8Rng::seed_from_u64(sweep.seed);
        triples.shuffle(&mut rng);
        triples.truncate(k);
        triples.sort_unstable();
    }
    let needed = triples
        .iter()
        .map(|&(n, r, s)| coefficients_needed(n, r, s))
        .max()
        .unwrap_or(1);
    let (lo, hi) = measure.support();
    let mut reports = Vec::with_capacity(triples.len());
    if !triples.is_empty() {
        let m = measure.build(needed)?;
        for &(n, r, s) in &triples {
            let (_, report) = check_in(&m, lo, r, hi, s, n, resolve(precision, r, s))?;
            reports.push(report);
        }
    }
    finish_checks(&reports, out)
}

pub fn cmd_check_file(measure: &MeasureArg, rule_path: &Path, out: Option<&Path>) -> CliResult {
    let text = read(rule_path)?;
    let rule: GenGaussRule = serde_json::from_str(&text)
        .map_err(|e| domain(format!("{}: not a rule file: {e}", rule_path.display())))?;
    let consistent = rule.nodes.len() == rule.n
        && rule.interior_weights.len() == rule.n
        && rule.left_weights.len() == rule.r
        && rule.right_weights.len() == rule.s;
    if !consistent {
        return Err(domain(format!(
            "{}: weight counts do not match n, r, s",
            rule_path.display()
        )));
    }
    let m = measure.build(coefficients_needed(rule.n, rule.r, rule.s))?;
    let report = check_rule(&m, &rule)?;
    finish_checks(&[report], out)
}

fn finish_checks(reports: &[RuleCheck], out: Option<&Path>) -> CliResult {
    let mut table = format!("{TABLE_HEADER}\n");
    for report in reports {
        let _ = writeln!(table, "{}", table_row(report));
    }
    let failed = reports.iter().filter(|r| !r.passed()).count();
    let _ = writeln!(table, "{} rule(s) checked, {failed} failed", reports.len());
    stdout(&table)?;
    if let Some(path) = out {
        emit(Some(path), &json(reports))?;
    }
    if failed > 0 {
        Err(CliError::ChecksFailed(failed))
    } else {
        Ok(())
    }
}

const SCAN_SAMPLES: usize = 4001;

fn parse_function(text: &str, support: (f64, f64)) -> CliResult<Expr> {
    let f = exprcalc::parse(text)?;
    f.check_interval(support.0, support.1, SCAN_SAMPLES)?;
    Ok(f)
}

pub fn cmd_integrate(
    args: &RuleArgs,
    f: &str,
    exact: Option<f64>,
    precision: PrecisionChoice,
) -> CliResult {
    let f = parse_function(f, args.measure.support())?;
    let m = args.build_measure()?;
    let (a, b) = args.endpoints();
    let rule = rulegen::build_rule_with(
        &m,
        a,
        args.r,
        b,
        args.s,
        args.n,
        resolve(precision, args.r, args.s),
    )?;
    let q = quadrature::apply_fn(&rule, &f)?;
    let mut text = format!("Q = {}\n", float(q));
    if let Some(exact) = exact {
        let _ = writeln!(text, "R = {}", float(exact - q));
    }
    stdout(&text)?;
    Ok(())
}

pub struct LevelSetArgs {
    pub a: f64,
    pub alpha: f64,
    pub b: f64,
    pub beta: f64,
    pub rho: Vec<f64>,
    pub window: Option<Window>,
    pub resolution: (usize, usize),
}

/// Smallest sensible window: the interval, the charges and a margin.
pub fn default_window(a: f64, b: f64) -> Window {
    let x_min = a.min(-1.0) - 0.5;
    let x_max = b.max(1.0) + 0.5;
    let half_height = 0.5 * (x_max - x_min) * 0.75;
    Window::new(x_min, x_max, -half_height, half_height)
}

pub fn cmd_levelset(args: &LevelSetArgs, out: Option<&Path>, spec_out: Option<&Path>) -> CliResult {
    let spec = potential::solve_support(args.a, args.alpha, args.b, args.beta)?;
    let window = args
        .window
        .unwrap_or_else(|| default_window(args.a, args.b));
    let mut sets = Vec::with_capacity(args.rho.len());
    for &rho in &args.rho {
        let set = potential::trace_contours(&spec, rho, window, args.resolution)?;
        eprintln!("rho = {rho}: {} component(s)", set.component_count);
        for warning in &set.warnings {
            eprintln!("warning: {warning}");
        }
        sets.push(set);
    }
    emit(spec_out, &json(&spec))?;
    if let Some(path) = out {
        emit(Some(path), &format::contour_csv(&sets))?;
    }
    Ok(())
}

pub struct ConvergeArgs<'a> {
    pub measure: &'a MeasureArg,
    pub f: &'a str,
    pub alpha: f64,
    pub beta: f64,
    pub n_min: usize,
    pub n_max: usize,
    pub exact: Option<f64>,
    pub singularity: Option<Complex64>,
}

/// Reference integrals need a 250-point Gauss rule of the measure.
const REFERENCE_COEFFICIENTS: usize = 251;

pub fn cmd_converge(
    args: &ConvergeArgs,
    precision: PrecisionChoice,
    out: Option<&Path>,
) -> CliResult {
    let f = parse_function(args.f, args.measure.support())?;
    let schedule = Schedule::new(args.alpha, args.beta)?;
    if args.n_min > args.n_max {
        return Err(domain("n-min exceeds n-max"));
    }
    let (r_max, s_max) = schedule.orders(args.n_max);
    let mut needed = coefficients_needed(args.n_max, r_max, s_max);
    if args.exact.is_none() {
        needed = needed.max(REFERENCE_COEFFICIENTS);
    }
    let m = args.measure.build(needed)?;
    let mut study = convergence::rate_study_with(
        &m,
        &f,
        args.exact,
        schedule,
        args.n_min..=args.n_max,
        precision,
    )?;
    if let Some(z0) = args.singularity {
        study = study.with_prediction(&m, z0)?;
    }
    if let Some(d) = f.polynomial_degree() {
        let first = (args.n_min..=args.n_max).find(|&n| {
            let (r, s) = schedule.orders(n);
            2 * n + r + s > d
        });
        match first {
            Some(n) => eprintln!(
                "note: f is a polynomial of degree {d}; the rule is exact from n = {n} on"
            ),
            None => eprintln!(
                "note: f is a polynomial of degree {d}; no n in range integrates it exactly"
            ),
        }
    }
    let fmt_rate = |x: Option<f64>| {
        x.map(|v| format!("{v:.6e}"))
            .unwrap_or_else(|| "none".into())
    };
    eprintln!(
        "fitted rate {}, predicted rate {}{}",
        fmt_rate(study.fitted_rate),
        fmt_rate(study.predicted_rate),
        if study.saturated {
            " (saturated: all errors at roundoff level)"
        } else {
            ""
        }
    );
    emit(out, &json(&study))
}

pub struct SplineArgs<'a> {
    pub f: &'a str,
    pub m: usize,
    pub n: usize,
    pub samples: Option<usize>,
    pub samples_out: Option<&'a Path>,
}

pub fn cmd_spline(args: &SplineArgs, out: Option<&Path>) -> CliResult {
    let f = exprcalc::parse(args.f)?;
    let sd = spline::moment_spline(&f, args.m, args.n)?;
    let order = sd.exact_moments() + 1;
    let residuals = spline::verify_spline_moments(&sd, &f, order)?;
    emit(out, &json(&sd))?;
    eprintln!("   j  mu_j                     residual");
    for row in &residuals {
        let tag = if row.j > sd.exact_moments() {
            "  (beyond exactness)"
        } else {
            ""
        };
        eprintln!("{:4}  {:<23.16e}  {:.3e}{tag}", row.j, row.mu, row.residual);
    }
    if let Some(count) = args.samples {
        emit(args.samples_out, &format::spline_csv(&sd, count))?;
    }
    Ok(())
}
