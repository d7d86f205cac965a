mod commands;
mod measure_arg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gengauss::num_complex::Complex64;
use gengauss::potential::Window;
use gengauss::real::Precision;

use commands::{CliError, CliResult, OutputFormat};
use measure_arg::MeasureArg;

/// Generalized Gauss-Radau and Gauss-Lobatto quadrature.
#[derive(Debug, Parser)]
#[command(name = "gengauss", version, about)]
struct Cli {
    /// Arithmetic for rule construction: auto, double or double-double.
    #[arg(long, global = true, env = "GENGAUSS_PRECISION", default_value = "auto", value_parser = parse_precision)]
    precision: PrecisionArg,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy)]
struct PrecisionArg(Option<Precision>);

fn parse_precision(text: &str) -> Result<PrecisionArg, String> {
    if text.trim().eq_ignore_ascii_case("auto") {
        return Ok(PrecisionArg(None));
    }
    Precision::parse(text)
        .map(|p| PrecisionArg(Some(p)))
        .ok_or_else(|| {
            format!("unknown precision {text:?} (expected auto, double or double-double)")
        })
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct RuleSpec {
    /// jacobi:p,q | laguerre:p | density:<expr>:<lo>:<hi>
    #[arg(long)]
    measure: String,
    /// Left endpoint, defaults to the left end of the support.
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    /// Number of derivative conditions at a.
    #[arg(long, default_value_t = 0)]
    r: usize,
    /// Right endpoint, defaults to the right end of the support.
    #[arg(long, allow_hyphen_values = true)]
    b: Option<f64>,
    /// Number of derivative conditions at b.
    #[arg(long, default_value_t = 0)]
    s: usize,
    /// Number of free nodes.
    #[arg(long)]
    n: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a rule and write it as JSON or CSV.
    Rule {
        #[command(flatten)]
        spec: RuleSpec,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify a rule file, or sweep over (n, r, s).
    Check {
        #[arg(long)]
        measure: String,
        /// Rule JSON to verify instead of a sweep.
        #[arg(long, conflicts_with_all = ["n_min", "n_max", "r_max", "s_max", "sample"])]
        rule: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        n_min: usize,
        #[arg(long, default_value_t = 10)]
        n_max: usize,
        #[arg(long, default_value_t = 4)]
        r_max: usize,
        #[arg(long, default_value_t = 4)]
        s_max: usize,
        /// Check only this many randomly chosen triples of the sweep.
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the reports as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply a rule to an expression in t.
    Integrate {
        #[command(flatten)]
        spec: RuleSpec,
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        #[arg(long, allow_hyphen_values = true)]
        exact: Option<f64>,
    },
    /// Solve for the support [A, B] and trace level curves.
    Levelset {
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
        #[arg(long)]
        beta: f64,
        /// Comma-separated level parameters, each > 1.
        #[arg(long, value_delimiter = ',', default_value = "1.05")]
        rho: Vec<f64>,
        /// x_min,x_max,y_min,y_max
        #[arg(long, allow_hyphen_values = true, value_parser = parse_window)]
        window: Option<Window>,
        /// N or NxM grid nodes.
        #[arg(long, default_value = "512", value_parser = parse_resolution)]
        resolution: (usize, usize),
        /// Contour CSV path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Spec JSON path, stdout when omitted.
        #[arg(long)]
        spec_out: Option<PathBuf>,
    },
    /// Rate study of the remainder with r_n = round(alpha n), s_n = round(beta n).
    Converge {
        #[arg(long)]
        measure: String,
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        #[arg(long, default_value_t = 1)]
        n_min: usize,
        #[arg(long)]
        n_max: usize,
        #[arg(long, allow_hyphen_values = true)]
        exact: Option<f64>,
        /// Nearest singularity of f as re,im for the predicted rate.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
        singularity: Option<Complex64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Moment-preserving spline of degree m with n knots on [0, 1].
    Spline {
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Number of equispaced samples for the CSV.
        #[arg(long, requires = "samples_out")]
        samples: Option<usize>,
        #[arg(long)]
        samples_out: Option<PathBuf>,
    },
}

fn floats(text: &str, count: usize) -> Result<Vec<f64>, String> {
    let values = text
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| format!("not a number: {v:?}"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.len() != count {
        return Err(format!("expected {count} comma-separated numbers"));
    }
    Ok(values)
}

fn parse_window(text: &str) -> Result<Window, String> {
    let v = floats(text, 4)?;
    Ok(Window::new(v[0], v[1], v[2], v[3]))
}

fn parse_complex(text: &str) -> Result<Complex64, String> {
    let v = floats(text, 2)?;
    Ok(Complex64::new(v[0], v[1]))
}

fn parse_resolution(text: &str) -> Result<(usize, usize), String> {
    let dim = |v: &str| {
        v.trim()
            .parse::<usize>()
            .map_err(|_| format!("bad resolution {text:?}"))
    };
    match text.split_once(['x', 'X']) {
        Some((nx, ny)) => Ok((dim(nx)?, dim(ny)?)),
        None => {
            let n = dim(text)?;
            Ok((n, n))
        }
    }
}

fn measure(text: &str) -> CliResult<MeasureArg> {
    Ok(MeasureArg::parse(text)?)
}

fn run(cli: Cli) -> CliResult {
    let precision = cli.precision.0;
    match cli.command {
        Command::Rule { spec, format, out } => {
            let m = measure(&spec.measure)?;
            let args = commands::RuleArgs {
                measure: &m,
                a: spec.a,
                r: spec.r,
                b: spec.b,
                s: spec.s,
                n: spec.n,
            };
            let fmt = match format {
                FormatArg::Json => OutputFormat::Json,
                FormatArg::Csv => OutputFormat::Csv,
            };
            commands::cmd_rule(&args, precision, fmt, out.as_deref())
        }
        Command::Check {
            measure: text,
            rule,
            n_min,
            n_max,
            r_max,
            s_max,
            sample,
            seed,
            out,
        } => {
            let m = measure(&text)?;
            match rule {
                Some(path) => commands::cmd_check_file(&m, &path, out.as_deref()),
                None => {
                    let sweep = commands::SweepArgs {
                        n_min,
                        n_max,
                        r_max,
                        s_max,
                        sample,
                        seed,
                    };
                    commands::cmd_check_sweep(&m, &sweep, precision, out.as_deref())
                }
            }
        }
        Command::Integrate { spec, f, exact } => {
            let m = measure(&spec.measure)?;
            let args = commands::RuleArgs {
                measure: &m,
                a: spec.a,
                r: spec.r,
                b: spec.b,
                s: spec.s,
                n: spec.n,
            };
            commands::cmd_integrate(&args, &f, exact, precision)
        }
        Command::Levelset {
            a,
            alpha,
            b,
            beta,
            rho,
            window,
            resolution,
            out,
            spec_out,
        } => {
            let args = commands::LevelSetArgs {
                a,
                alpha,
                b,
                beta,
                rho,
                window,
                resolution,
            };
            commands::cmd_levelset(&args, out.as_deref(), spec_out.as_deref())
        }
        Command::Converge {
            measure: text,
            f,
            alpha,
            beta,
            n_min,
            n_max,
            exact,
            singularity,
            out,
        } => {
            let m = measure(&text)?;
            let args = commands::ConvergeArgs {
                measure: &m,
                f: &f,
                alpha,
                beta,
                n_min,
                n_max,
                exact,
                singularity,
            };
            commands::cmd_converge(&args, precision, out.as_deref())
        }
        Command::Spline {
            f,
            m,
            n,
            out,
            samples,
            samples_out,
        } => {
            let args = commands::SplineArgs {
                f: &f,
                m,
                n,
                samples,
                samples_out: samples_out.as_deref(),
            };
            commands::cmd_spline(&args, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = e.exit_code();
            if !matches!(e, CliError::ChecksFailed(_)) {
                eprintln!("error: {e}");
            }
            ExitCode::from(code as u8)
        }
    }
}
