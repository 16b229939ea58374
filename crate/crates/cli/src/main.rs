//! `inscribe`: solve for polynomial inscriptions, run the invariant suites,
//! and generate or analyse point configurations.
//!
//! Exit codes: 0 success (at least one inscription), 3 no inscription
//! found, 2 a verification suite failed, 1 any input or runtime error.

mod plot;

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use inscribe_core::config::{detect_cyclically_reducible_quadratic, make_pinwheel, raw_points_from_json};
use inscribe_core::io::SolveRequest;
use inscribe_core::solver::fit_cassini;
use inscribe_core::verify::{run_suite, Suite, VerifyReport};
use inscribe_core::{JordanCurve, PointConfig, SolveOptions, SolveReport};
use serde::Serialize;

use crate::plot::PlotSpec;

const EXIT_INPUT: u8 = 1;
const EXIT_VERIFY_FAILED: u8 = 2;
const EXIT_NONE_FOUND: u8 = 3;
const THREADS_ENV: &str = "INSCRIBE_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "inscribe",
    version,
    about = "Find polynomial inscriptions of point configurations into smooth Jordan curves",
    args_conflicts_with_subcommands = true
)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    solve: SolveArgs,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Curve JSON: {"K": .., "coeffs": [{"k", "re", "im"}, ..]}
    #[arg(long)]
    curve: Option<PathBuf>,
    /// Config JSON: {"alpha": [[re, im], ..], "beta": [..]} or {"points": [..]}
    #[arg(long)]
    config: Option<PathBuf>,
    /// Polynomial degree; must equal n - 1
    #[arg(short = 'd', long)]
    degree: Option<usize>,
    /// Multistart count (default 2000 n)
    #[arg(long)]
    n_starts: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print the full report as JSON
    #[arg(long)]
    json: bool,
    /// Write an SVG plot of the curve, the points and the image points
    #[arg(long, value_name = "OUT")]
    svg: Option<PathBuf>,
    /// Acceptance bound on max dist(p(q), curve)
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run seeded invariant suites and print a pass/fail table
    Verify {
        /// forms, clean, maslov, pinwheel or all
        #[arg(default_value = "all")]
        suite: String,
        #[arg(short = 'n', long = "n-trials", default_value_t = 100)]
        n_trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Print the theta-pinwheel configuration as JSON
    Pinwheel {
        #[arg(short = 'n')]
        n: usize,
        #[arg(short = 't', long = "theta", allow_hyphen_values = true)]
        theta: f64,
    },
    /// Test a six-point set for cyclic reducibility by a quadratic
    Reduce { config: PathBuf },
    /// Fit a Cassini oval through six points
    Cassini { config: PathBuf },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<inscribe_core::Error> for Failure {
    fn from(e: inscribe_core::Error) -> Self {
        Failure::input(format!("{}: {e}", e.code()))
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        match e.kind() {
            // output piped into head and the like
            io::ErrorKind::BrokenPipe => Failure {
                code: 0,
                message: String::new(),
            },
            _ => Failure::input(format!("cannot write output: {e}")),
        }
    }
}

type CliResult = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
}

fn parse_file<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T, Failure> {
    serde_json::from_str(&read(path)?).map_err(|e| Failure::input(format!("{what} file {}: {e}", path.display())))
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::input(e.to_string()))?;
    writeln!(io::stdout().lock(), "{text}")?;
    Ok(())
}

fn threads_from_env() -> Result<Option<usize>, Failure> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::input(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(None),
    }
}

fn fmt_complex(z: num_complex::Complex64) -> String {
    format!("{:+.9}{:+.9}i", z.re, z.im)
}

fn print_summary(report: &SolveReport) -> io::Result<()> {
    let mut out = io::stdout().lock();
    writeln!(
        out,
        "{} inscription(s) from {} starts ({} converged, {} constant, {} rejected{}) in {:.2}s",
        report.inscriptions.len(),
        report.n_starts,
        report.n_converged,
        report.n_constant_discarded,
        report.n_rejected,
        if report.truncated { ", truncated" } else { "" },
        report.wall_time.as_secs_f64()
    )?;
    for (k, ins) in report.inscriptions.iter().enumerate() {
        let coeffs: Vec<String> = ins.poly.coeffs().iter().map(|z| fmt_complex(*z)).collect();
        writeln!(
            out,
            "p{}: [{}] residual {:.2e}{}",
            k + 1,
            coeffs.join(", "),
            ins.residual,
            if ins.degenerate { " degenerate" } else { "" }
        )?;
    }
    Ok(())
}

fn solve(args: SolveArgs) -> CliResult {
    let curve_path = args.curve.ok_or_else(|| Failure::input("--curve is required"))?;
    let config_path = args.config.ok_or_else(|| Failure::input("--config is required"))?;
    let curve: JordanCurve = parse_file(&curve_path, "curve")?;
    let config: PointConfig = parse_file(&config_path, "config")?;
    let mut opts = SolveOptions {
        n_starts: args.n_starts,
        seed: args.seed,
        threads: threads_from_env()?,
        ..Default::default()
    };
    if let Some(tol) = args.tol {
        opts.accept_tol = tol;
    }
    let request = SolveRequest {
        curve,
        config,
        degree: args.degree,
        opts,
    };
    let report = request.solve()?;
    if args.json {
        print_json(&report)?;
    } else {
        print_summary(&report)?;
    }
    if let Some(out) = args.svg {
        let svg = PlotSpec::default().render(&request.curve, &request.config, &report);
        std::fs::write(&out, svg).map_err(|e| Failure::input(format!("cannot write {}: {e}", out.display())))?;
    }
    Ok(if report.inscriptions.is_empty() { EXIT_NONE_FOUND } else { 0 })
}

fn print_table(report: &VerifyReport) -> io::Result<()> {
    let mut out = io::stdout().lock();
    writeln!(out, "{:<10} {:<56} {:>9} {:>12} {:>10}  result", "suite", "check", "passed", "worst", "bound")?;
    for row in &report.rows {
        writeln!(
            out,
            "{:<10} {:<56} {:>9} {:>12.3e} {:>10.1e}  {}",
            row.suite.to_string(),
            row.check,
            format!("{}/{}", row.passed, row.trials),
            row.worst,
            row.bound,
            if row.pass { "PASS" } else { "FAIL" }
        )?;
    }
    if !report.counterexamples.is_empty() {
        writeln!(
            out,
            "{} non-interleaved counterexample(s) to positivity logged",
            report.counterexamples.len()
        )?;
    }
    writeln!(out, "{}", if report.pass { "all checks passed" } else { "some checks FAILED" })
}

fn verify(suite: &str, n_trials: usize, seed: u64, json: bool) -> CliResult {
    let suite: Suite = suite.parse()?;
    if n_trials == 0 {
        return Err(Failure::input("--n-trials must be positive"));
    }
    let report = run_suite(suite, n_trials, seed);
    if json {
        print_json(&report)?;
    } else {
        print_table(&report)?;
    }
    Ok(if report.pass { 0 } else { EXIT_VERIFY_FAILED })
}

#[derive(Serialize)]
struct ReduceOutput {
    reducible: bool,
    #[serde(flatten)]
    analysis: Option<inscribe_core::config::ReducibleQuadratic>,
}

#[derive(Serialize)]
struct CassiniOutput {
    on_cassini_oval: bool,
    #[serde(flatten)]
    fit: Option<inscribe_core::solver::CassiniFit>,
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        None => solve(cli.solve),
        Some(Command::Verify {
            suite,
            n_trials,
            seed,
            json,
        }) => verify(&suite, n_trials, seed, json),
        Some(Command::Pinwheel { n, theta }) => {
            print_json(&make_pinwheel(n, theta)?)?;
            Ok(0)
        }
        Some(Command::Reduce { config }) => {
            let points = raw_points_from_json(&read(&config)?)?;
            let analysis = detect_cyclically_reducible_quadratic(&points)?;
            print_json(&ReduceOutput {
                reducible: analysis.is_some(),
                analysis,
            })?;
            Ok(0)
        }
        Some(Command::Cassini { config }) => {
            let points = raw_points_from_json(&read(&config)?)?;
            let fit = fit_cassini(&points)?;
            print_json(&CassiniOutput {
                on_cassini_oval: fit.is_some(),
                fit,
            })?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INPUT)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}
