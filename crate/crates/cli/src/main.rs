//! Command-line front end: point and grid evaluation of densities,
//! distribution and survivor functions, directional normalizing constants,
//! saddlepoint comparison grids, and the validation suites.

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use std::io::Write;
use std::process::ExitCode;

use chiquad::checks;
use chiquad::difference::{cdf_diff_with, pdf_diff_with};
use chiquad::directional::{
    bingham_const, complex_bingham_const, fisher_so3_const, fisher_so3_grad, kent_const,
    kent_const_with_radius, BinghamParams, KentParams,
};
use chiquad::inversion::{EvalOptions, EvalResult};
use chiquad::model::QuadraticFormSpec;
use chiquad::spa::{spa_cdf, spa_cdf_via_pdf, spa_pdf, CgfContext};
use chiquad::Error;

#[derive(Parser)]
#[command(name = "chiquad", version, about = "Distributions of linear combinations of chi-squares via branch-cut contour inversion", disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct EvalArgs {
    /// Path to a spec file (JSON with positive/negative term lists).
    #[arg(long)]
    spec: String,
    /// Evaluate at a single point.
    #[arg(long, conflicts_with = "grid")]
    at: Option<f64>,
    /// Evaluate on an inclusive grid A:B:N.
    #[arg(long)]
    grid: Option<String>,
    /// Pole-shift parameter of the distribution-function identity.
    #[arg(long)]
    theta0: Option<f64>,
    #[arg(long, value_enum, default_value = "csv")]
    out: OutFormat,
    /// Relative tolerance per contour piece.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Density of the combination (or difference) at points.
    Pdf(EvalArgs),
    /// Distribution function P(X <= x).
    Cdf(EvalArgs),
    /// Survivor function P(X > x).
    Survivor(EvalArgs),
    /// Normalizing constant of the quadratic exponential family on a sphere.
    Bingham {
        /// Comma-separated thetas (any signs).
        #[arg(long, value_delimiter = ',', required = true)]
        theta: Vec<f64>,
        /// Comma-separated multiplicities, one per theta.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u32>,
    },
    /// Rotation-group constant for a diagonal 3x3 parameter matrix.
    FisherSo3 {
        /// Comma-separated diagonal entries phi1,phi2,phi3.
        #[arg(long, value_delimiter = ',', required = true)]
        phi: Vec<f64>,
        /// Also print the gradient of the log constant.
        #[arg(long)]
        grad: bool,
    },
    /// Closed-form constant for pairwise-equal thetas (complex sphere).
    Cbingham {
        #[arg(long, value_delimiter = ',', required = true)]
        theta: Vec<f64>,
    },
    /// One-linear-term constant on the two-sphere with equally spaced thetas.
    Kent {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        kappa: f64,
        /// Circle radius in (beta, 2 beta); defaults to 1.5 beta.
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Run a validation suite and report per-case pass/fail.
    Check {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Exact vs saddlepoint comparison grid.
    SpaCompare {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        grid: String,
        #[arg(long, value_enum, default_value = "csv")]
        out: OutFormat,
    },
}

enum CliError {
    Usage(String),
    NoConvergence(String),
    CheckFailed,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NoConvergence(m) => CliError::NoConvergence(m),
            other => CliError::Usage(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::CheckFailed) => ExitCode::from(1),
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::NoConvergence(m)) => {
            eprintln!("error: no convergence: {m}");
            ExitCode::from(3)
        }
    }
}

fn load_spec(path: &str) -> Result<QuadraticFormSpec, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {path}: {e}")))?;
    Ok(QuadraticFormSpec::from_json_str(&text)?)
}

fn parse_grid(grid: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = grid.split(':').collect();
    let [a, b, n] = parts[..] else {
        return Err(CliError::Usage(format!("grid must be A:B:N, got {grid}")));
    };
    let a: f64 = a.parse().map_err(|_| CliError::Usage(format!("bad grid start {a}")))?;
    let b: f64 = b.parse().map_err(|_| CliError::Usage(format!("bad grid end {b}")))?;
    let n: usize = n.parse().map_err(|_| CliError::Usage(format!("bad grid count {n}")))?;
    if n == 0 {
        return Err(CliError::Usage("grid point count must be at least 1".into()));
    }
    if n > 1 && !(b > a) {
        return Err(CliError::Usage(format!("grid needs A < B, got {a}:{b}")));
    }
    Ok((0..n)
        .map(|i| if n == 1 { a } else { a + (b - a) * i as f64 / (n - 1) as f64 })
        .collect())
}

fn eval_points(args: &EvalArgs) -> Result<Vec<f64>, CliError> {
    match (&args.at, &args.grid) {
        (Some(x), None) => Ok(vec![*x]),
        (None, Some(g)) => parse_grid(g),
        _ => Err(CliError::Usage("exactly one of --at and --grid is required".into())),
    }
}

fn emit_rows(rows: &[(f64, f64, f64)], out: OutFormat) {
    let stdout = std::io::stdout();
    let mut w = stdout.lock();
    match out {
        OutFormat::Csv => {
            writeln!(w, "s,value,abs_err").unwrap();
            for &(s, v, e) in rows {
                writeln!(w, "{s:.16e},{v:.16e},{e:.16e}").unwrap();
            }
        }
        OutFormat::Json => {
            let arr: Vec<serde_json::Value> = rows
                .iter()
                .map(|&(s, v, e)| {
                    serde_json::json!({ "s": s, "value": v, "abs_err": e })
                })
                .collect();
            writeln!(w, "{}", serde_json::Value::Array(arr)).unwrap();
        }
    }
}

type PointEval = dyn Fn(&QuadraticFormSpec, f64, &EvalOptions) -> chiquad::Result<EvalResult> + Sync;

fn run_eval(args: &EvalArgs, eval: &PointEval) -> Result<(), CliError> {
    let spec = load_spec(&args.spec)?;
    let points = eval_points(args)?;
    let opts = EvalOptions { rel_tol: args.tol.unwrap_or(EvalOptions::default().rel_tol) };
    let results: Vec<chiquad::Result<EvalResult>> =
        points.par_iter().map(|&x| eval(&spec, x, &opts)).collect();
    let mut rows = Vec::with_capacity(points.len());
    for (x, r) in points.iter().zip(results) {
        let r = r?;
        rows.push((*x, r.value, r.abs_err));
    }
    emit_rows(&rows, args.out);
    Ok(())
}

fn run(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Pdf(args) => {
            run_eval(&args, &|spec, x, opts| pdf_diff_with(spec, x, opts))
        }
        Command::Cdf(args) => {
            let theta0 = args.theta0;
            run_eval(&args, &move |spec, x, opts| cdf_diff_with(spec, x, theta0, opts))
        }
        Command::Survivor(args) => {
            let theta0 = args.theta0;
            run_eval(&args, &move |spec, x, opts| {
                let mut r = cdf_diff_with(spec, x, theta0, opts)?;
                r.value = 1.0 - r.value;
                Ok(r)
            })
        }
        Command::Bingham { theta, n } => {
            if theta.len() != n.len() {
                return Err(CliError::Usage("--theta and --n need equal lengths".into()));
            }
            let c = bingham_const(&BinghamParams { theta, n })?;
            println!("{c:.7}");
            Ok(())
        }
        Command::FisherSo3 { phi, grad } => {
            let phi: [f64; 3] = phi
                .try_into()
                .map_err(|_| CliError::Usage("--phi needs exactly three entries".into()))?;
            println!("{:.7}", fisher_so3_const(&phi)?);
            if grad {
                let g = fisher_so3_grad(&phi)?;
                println!("{:.7},{:.7},{:.7}", g[0], g[1], g[2]);
            }
            Ok(())
        }
        Command::Cbingham { theta } => {
            println!("{:.7}", complex_bingham_const(&theta)?);
            Ok(())
        }
        Command::Kent { beta, kappa, radius } => {
            let params = KentParams { beta, kappa };
            let c = match radius {
                Some(r) => kent_const_with_radius(&params, r)?,
                None => kent_const(&params)?,
            };
            println!("{c:.7}");
            Ok(())
        }
        Command::Check { suite, seed } => run_check(&suite, seed),
        Command::SpaCompare { spec, grid, out } => run_spa_compare(&spec, &grid, out),
    }
}

fn run_check(suite: &str, seed: u64) -> Result<(), CliError> {
    let mut cases = Vec::new();
    match suite {
        "table1" => cases.extend(checks::table1_suite()?),
        "closed-forms" => cases.extend(checks::closed_forms_suite()?),
        "oracles" => cases.extend(checks::oracles_suite(seed)?),
        "all" => {
            cases.extend(checks::table1_suite()?);
            cases.extend(checks::closed_forms_suite()?);
            cases.extend(checks::oracles_suite(seed)?);
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown suite {other}; expected table1|closed-forms|oracles|all"
            )))
        }
    }
    let mut failures = 0usize;
    for c in &cases {
        println!("{}", c.line());
        if !c.pass() {
            failures += 1;
        }
    }
    println!("{}/{} checks passed", cases.len() - failures, cases.len());
    if failures > 0 {
        return Err(CliError::CheckFailed);
    }
    Ok(())
}

fn run_spa_compare(spec_path: &str, grid: &str, out: OutFormat) -> Result<(), CliError> {
    let spec = load_spec(spec_path)?;
    let points = parse_grid(grid)?;
    let ctx = CgfContext::new(&spec);
    let opts = EvalOptions::default();

    struct Row {
        s: f64,
        exact_pdf: f64,
        spa_pdf: f64,
        exact_cdf: f64,
        spa_cdf: f64,
        spa_cdf_via_pdf: f64,
    }
    let rows: Vec<chiquad::Result<Row>> = points
        .par_iter()
        .map(|&s| {
            Ok(Row {
                s,
                exact_pdf: pdf_diff_with(&spec, s, &opts)?.value,
                spa_pdf: spa_pdf(&ctx, s)?,
                exact_cdf: cdf_diff_with(&spec, s, None, &opts)?.value,
                spa_cdf: spa_cdf(&ctx, s)?,
                spa_cdf_via_pdf: spa_cdf_via_pdf(&spec, s, None)?,
            })
        })
        .collect();

    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
    let stdout = std::io::stdout();
    let mut w = stdout.lock();
    match out {
        OutFormat::Csv => {
            writeln!(
                w,
                "s,exact_pdf,spa_pdf,exact_cdf,spa_cdf,spa_cdf_via_pdf,rel_err_pdf,rel_err_cdf,rel_err_cdf_via_pdf"
            )
            .unwrap();
            for r in rows {
                let r = r?;
                writeln!(
                    w,
                    "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                    r.s,
                    r.exact_pdf,
                    r.spa_pdf,
                    r.exact_cdf,
                    r.spa_cdf,
                    r.spa_cdf_via_pdf,
                    rel(r.spa_pdf, r.exact_pdf),
                    rel(r.spa_cdf, r.exact_cdf),
                    rel(r.spa_cdf_via_pdf, r.exact_cdf),
                )
                .unwrap();
            }
        }
        OutFormat::Json => {
            let mut arr = Vec::new();
            for r in rows {
                let r = r?;
                arr.push(serde_json::json!({
                    "s": r.s,
                    "exact_pdf": r.exact_pdf,
                    "spa_pdf": r.spa_pdf,
                    "exact_cdf": r.exact_cdf,
                    "spa_cdf": r.spa_cdf,
                    "spa_cdf_via_pdf": r.spa_cdf_via_pdf,
                    "rel_err_pdf": rel(r.spa_pdf, r.exact_pdf),
                    "rel_err_cdf": rel(r.spa_cdf, r.exact_cdf),
                    "rel_err_cdf_via_pdf": rel(r.spa_cdf_via_pdf, r.exact_cdf),
                }));
            }
            writeln!(w, "{}", serde_json::Value::Array(arr)).unwrap();
        }
    }
    Ok(())
}
