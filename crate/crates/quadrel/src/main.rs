use std::fs::File;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use quadrel::adaptive::{integrate, Status, DEFAULT_MAX_SUBDIVISIONS};
use quadrel::bench::{
    emit_report, run_sweep, FamilyId, FamilySpec, Mode, Pipeline, ReportFormat,
};
use quadrel::criteria::analyze_profile;
use quadrel::expr::Expr;
use quadrel::profile::IntegrandProfile;
use quadrel::rule::{local_estimate, map_knots, Interval, QuadRule, INNER_KNOTS};
use quadrel::verdict::decide;

#[derive(Parser)]
#[command(name = "quadrel", about = "Self-validating GK 10-21 adaptive quadrature")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a function adaptively and report the validated result.
    Integrate {
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
        #[arg(long, allow_negative_numbers = true)]
        b: f64,
        #[arg(long, default_value_t = 0.0)]
        eps_abs: f64,
        #[arg(long, default_value_t = 1e-8)]
        eps_rel: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_SUBDIVISIONS)]
        limit: usize,
        /// Builtin family instance `family:n` (for example c1:1612) or an
        /// expression in x such as `exp(x+1)*cos(12*x)`.
        #[arg(long)]
        function: String,
    },
    /// Sweep one benchmark family and emit per-parameter rows.
    Sweep {
        #[arg(long)]
        family: String,
        #[arg(long, default_value = "gamma")]
        pipeline: String,
        #[arg(long, default_value = "single")]
        mode: String,
        /// Restrict the parameter grid to n <= this value.
        #[arg(long)]
        max_n: Option<u32>,
        #[arg(long)]
        out: Option<String>,
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Dump the 23-point integrand profile in the tab-separated fixture
    /// format.
    ProfileDump {
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
        #[arg(long, allow_negative_numbers = true)]
        b: f64,
        #[arg(long)]
        function: String,
    },
}

fn parse_function(spec: &str) -> Result<Box<dyn Fn(f64) -> f64 + Send + Sync>, String> {
    if let Some((fam, n)) = spec.split_once(':') {
        if let Some(id) = FamilyId::parse(fam) {
            let n: u32 = n
                .parse()
                .map_err(|_| format!("bad family parameter `{n}`"))?;
            return Ok(FamilySpec::new(id).integrand(n));
        }
    }
    let expr = Expr::parse(spec).map_err(|e| e.to_string())?;
    Ok(Box::new(move |x| expr.eval(x)))
}

const EXIT_TOLERANCE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_EVAL: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse(); // clap exits with code 2 on usage errors
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_EVAL)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Integrate {
            a,
            b,
            eps_abs,
            eps_rel,
            limit,
            function,
        } => {
            let f = match parse_function(&function) {
                Ok(f) => f,
                Err(msg) => {
                    eprintln!("error: {msg}");
                    return Ok(ExitCode::from(EXIT_USAGE));
                }
            };
            let iv = Interval::new(a, b).map_err(|e| e.to_string())?;
            let result = integrate(&f, iv, eps_abs, eps_rel, limit).map_err(|e| e.to_string())?;
            println!("Q      = {:.16e}", result.q);
            println!("E      = {:.16e}", result.e);
            println!("status = {}", result.status);
            println!("leaves = {}", result.ledger.len());
            println!("evals  = {}", result.evaluations);
            Ok(match result.status {
                Status::LimitReached => ExitCode::from(EXIT_TOLERANCE),
                _ => ExitCode::SUCCESS,
            })
        }
        Command::Sweep {
            family,
            pipeline,
            mode,
            max_n,
            out,
            format,
        } => {
            let Some(id) = FamilyId::parse(&family) else {
                eprintln!("error: unknown family `{family}`");
                return Ok(ExitCode::from(EXIT_USAGE));
            };
            let Some(pipeline) = Pipeline::parse(&pipeline) else {
                eprintln!("error: unknown pipeline `{pipeline}`");
                return Ok(ExitCode::from(EXIT_USAGE));
            };
            let mode = match mode.to_ascii_lowercase().as_str() {
                "single" => Mode::SingleRule,
                "adaptive" => Mode::Adaptive,
                other => {
                    eprintln!("error: unknown mode `{other}`");
                    return Ok(ExitCode::from(EXIT_USAGE));
                }
            };
            let format = match format.to_ascii_lowercase().as_str() {
                "csv" => ReportFormat::Csv,
                "table" => ReportFormat::Table,
                other => {
                    eprintln!("error: unknown format `{other}`");
                    return Ok(ExitCode::from(EXIT_USAGE));
                }
            };
            let mut fam = FamilySpec::new(id);
            if let Some(hi) = max_n {
                let lo = *fam.grid.start();
                fam.grid = lo..=hi.max(lo);
            }
            let rows = run_sweep(&fam, mode, pipeline).map_err(|e| e.to_string())?;
            match out {
                Some(path) => {
                    let mut file = File::create(&path).map_err(|e| e.to_string())?;
                    emit_report(&rows, id, format, &mut file).map_err(|e| e.to_string())?;
                }
                None => {
                    let stdout = io::stdout();
                    let mut lock = stdout.lock();
                    emit_report(&rows, id, format, &mut lock).map_err(|e| e.to_string())?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ProfileDump { a, b, function } => {
            let f = match parse_function(&function) {
                Ok(f) => f,
                Err(msg) => {
                    eprintln!("error: {msg}");
                    return Ok(ExitCode::from(EXIT_USAGE));
                }
            };
            let iv = Interval::new(a, b).map_err(|e| e.to_string())?;
            let rule = QuadRule::gk10_21();
            let xs = map_knots(&rule, &iv);
            let mut inner = [0.0; INNER_KNOTS];
            for k in 0..INNER_KNOTS {
                inner[k] = f(xs[k + 1]);
            }
            let est = local_estimate(&rule, &inner, &iv, f64::EPSILON).map_err(|e| e.to_string())?;
            let profile = IntegrandProfile::build(&f, &iv, &rule, &est).map_err(|e| e.to_string())?;
            let diag = analyze_profile(&profile);
            let verdict = decide(&est, &profile, Some(&diag)).map_err(|e| e.to_string())?;
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write!(lock, "{}", profile.dump()).map_err(|e| e.to_string())?;
            writeln!(
                lock,
                "# q2n={:.16e}\te2n={:.16e}\tlambda={}\tverdict={}",
                est.q2n, est.e2n, diag.lambda, verdict.kind
            )
            .map_err(|e| e.to_string())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
