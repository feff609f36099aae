//! `phank`: Hankel determinants of perturbed Jacobi weights from the command
//! line. Every subcommand prints one report (JSON or CSV) to stdout.

mod commands;
mod nlist;
mod report;

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use phank::{parse_h, validate_positive, JacobiParams, PerturbationFn, Precision};

use commands::{CompareOptions, Failure};
use report::{Format, Parameters, Row, RunReport, SCHEMA_VERSION};

#[derive(Parser, Debug)]
#[command(name = "phank", version, about = "Hankel determinants of perturbed Jacobi weights")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// ln D_n of the pure weight: closed form, product of norms, and LDL.
    Exact(Common),
    /// Direct ln D_n[w h] against the asymptotic prediction.
    Compare(PerturbedArgs),
    /// Support endpoints and effective recurrence coefficients.
    Fluid(Common),
    /// Equilibrium density on a grid over its support.
    Density {
        #[command(flatten)]
        common: Common,
        /// Grid points per n.
        #[arg(long, default_value_t = 65)]
        points: usize,
    },
    /// Determinant ratio against the n-fold average of prod h (n <= 3).
    Heine(PerturbedArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Sizes: comma list and/or inclusive ranges a:b[:step].
    #[arg(long)]
    n: String,
    /// Exponent of (1-x).
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    alpha: String,
    /// Exponent of (1+x).
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    beta: String,
    /// Decimal digits (default: max(64, ceil(1.4 n) + 32) per n).
    #[arg(long)]
    digits: Option<u32>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug)]
struct PerturbedArgs {
    #[command(flatten)]
    common: Common,
    /// The perturbation h(x), e.g. "exp(x)" or "1 + x^2/2".
    #[arg(long, default_value = "1")]
    h: String,
    /// Gauss-Jacobi order for the moments of w h.
    #[arg(long)]
    quad_order: Option<usize>,
    /// Chebyshev resolution for ln h (a power of two).
    #[arg(long)]
    cheb_m: Option<usize>,
    /// Add the n-fold quadrature average of prod h (n <= 3).
    #[arg(long)]
    heine: bool,
}

struct Setup {
    ns: Vec<usize>,
    jp: JacobiParams,
    params: Parameters,
}

fn setup(c: &Common) -> Result<Setup, Failure> {
    let ns = nlist::parse_n_list(&c.n).map_err(Failure::Usage)?;
    let jp = JacobiParams::parse(&c.alpha, &c.beta)?;
    if let Some(d) = c.digits {
        Precision::new(d)?;
        for &n in &ns {
            let policy = Precision::for_hankel(n).digits();
            if d < policy {
                eprintln!("warning: --digits {d} is below the policy of {policy} digits for n = {n}");
            }
        }
    }
    let params = Parameters {
        n: ns.clone(),
        alpha: jp.alpha().to_string(),
        beta: jp.beta().to_string(),
        h: None,
        digits: c.digits,
        quad_order: None,
        cheb_m: None,
        heine: false,
    };
    Ok(Setup { ns, jp, params })
}

fn parse_and_validate(source: &str, ns: &[usize], digits: Option<u32>) -> Result<PerturbationFn, Failure> {
    let h = parse_h(source)?;
    let n_max = ns.iter().copied().max().unwrap_or(1);
    let p = commands::precision_for(n_max, digits)?;
    Ok(validate_positive(h, phank::dsl::DEFAULT_POSITIVITY_SAMPLES, p)?)
}

fn command_echo() -> String {
    std::env::args()
        .map(|a| {
            if !a.is_empty() && a.chars().all(|c| c.is_ascii_alphanumeric() || "-_.,:/=+".contains(c)) {
                a
            } else {
                format!("'{}'", a.replace('\'', r"'\''"))
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn run(cli: Cli) -> Result<(RunReport, Format, u8), Failure> {
    let start = Instant::now();
    let (setup, format, rows, code) = match &cli.command {
        Command::Exact(c) => {
            let s = setup(c)?;
            let (rows, code) = commands::sweep(&s.ns, |n| commands::exact(n, &s.jp, c.digits).map(|r| vec![r]));
            (s, c.format, rows, code)
        }
        Command::Fluid(c) => {
            let s = setup(c)?;
            let (rows, code) = commands::sweep(&s.ns, |n| commands::fluid(n, &s.jp, c.digits).map(|r| vec![r]));
            (s, c.format, rows, code)
        }
        Command::Density { common: c, points } => {
            let s = setup(c)?;
            let (rows, code) = commands::sweep(&s.ns, |n| commands::density(n, &s.jp, c.digits, *points));
            (s, c.format, rows, code)
        }
        Command::Compare(a) | Command::Heine(a) => {
            let is_heine = matches!(cli.command, Command::Heine(_));
            let c = &a.common;
            let mut s = setup(c)?;
            if (is_heine || a.heine) && s.ns.iter().any(|&n| n > 3) {
                return Err(Failure::Usage("the quadrature average is limited to n <= 3".into()));
            }
            let h = parse_and_validate(&a.h, &s.ns, c.digits)?;
            s.params.h = Some(h.source().to_string());
            s.params.quad_order = a.quad_order;
            s.params.cheb_m = a.cheb_m;
            s.params.heine = is_heine || a.heine;
            let (rows, code) = if is_heine {
                commands::sweep(&s.ns, |n| {
                    commands::heine(n, &s.jp, &h, c.digits, a.quad_order).map(|r| vec![r])
                })
            } else {
                let opts = CompareOptions {
                    h: &h,
                    digits: c.digits,
                    quad_order: a.quad_order,
                    cheb_m: a.cheb_m,
                    heine: a.heine,
                };
                commands::sweep(&s.ns, |n| commands::compare(n, &s.jp, &opts).map(|r| vec![r]))
            };
            (s, c.format, rows, code)
        }
    };
    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION"),
        command: command_echo(),
        asymptotic_valid: setup.jp.asymptotic_valid(),
        parameters: setup.params,
        rows,
        elapsed_ms: start.elapsed().as_millis(),
    };
    Ok((report, format, code))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((report, format, code)) => {
            let mut out = std::io::stdout().lock();
            if let Err(e) = report.write(format, &mut out).and_then(|_| out.flush()) {
                eprintln!("error: writing report: {e}");
                return ExitCode::from(1);
            }
            for row in report.rows.iter().filter_map(Row::error) {
                eprintln!("error: {row}");
            }
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
