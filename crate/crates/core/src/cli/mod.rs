//! Command-line front end.
//!
//! ```bash
//! diffquot check --criterion algebraic --expr "a*b"
//! diffquot recover --criterion summation --series xexp.coeffs --out report.json
//! diffquot verify --expr "exp(x)" --deriv "exp(x)"
//! diffquot demo dirichlet
//! diffquot replay report.json
//! ```
//!
//! Exit status: 0 accept, 1 reject, 2 inconclusive, 3 usage or parse error.

pub mod demo;
pub mod manifest;
pub mod run;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::criteria::AlgebraicVariant;
use crate::quadrature::QuadratureConfig;
use crate::scalar::{Mode, Scalar, Tolerance};
pub use manifest::{CommandKind, CriterionSelection, DemoName, RunManifest, RunReport};
pub use run::{execute, CliError, RunOutcome};

pub const EXIT_USAGE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "diffquot", version, about = "Decide whether H(a,b) is a difference quotient and recover f")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the selected criteria on H
    Check(RunArgs),
    /// Run the criteria, recover f and check DQ_f against H
    Recover(RunArgs),
    /// Build H = DQ_f from f (and f') and check it
    Verify(RunArgs),
    /// Run one of the built-in examples
    Demo {
        name: DemoName,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Re-run the manifest embedded in a report
    Replay {
        report: PathBuf,
        /// Write the new report here instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Report path (default: standard output)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the recovered function
    #[arg(long)]
    function_out: Option<PathBuf>,
    /// Include wall time in the report
    #[arg(long)]
    timing: bool,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long, value_enum, default_value = "all")]
    criterion: CriterionSelection,
    /// Algebraic form used by `--criterion algebraic`
    #[arg(long, value_enum, default_value = "triple")]
    variant: VariantArg,
    /// H in a and b (f in x for verify)
    #[arg(long)]
    expr: Option<String>,
    /// Coefficient file with `i j value` lines
    #[arg(long)]
    series: Option<PathBuf>,
    /// f' in x, for verify
    #[arg(long)]
    deriv: Option<String>,
    /// float or exact (default: exact for exact series or a --pool, else float)
    #[arg(long)]
    mode: Option<Mode>,
    /// Comma-separated exact sample points, e.g. "0,1/3,1/2*sqrt2,1"
    #[arg(long)]
    pool: Option<String>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = manifest::DEFAULT_COUNT)]
    count: usize,
    /// Smallest gap between sample points (default 1e-3 float, 0 exact)
    #[arg(long)]
    min_gap: Option<f64>,
    #[arg(long, default_value_t = 1e-9)]
    abs_tol: f64,
    #[arg(long, default_value_t = 1e-9)]
    rel_tol: f64,
    /// Absolute error target for quadrature
    #[arg(long, default_value_t = 1e-10)]
    quad_tol: f64,
    /// Recovery constant C
    #[arg(long, allow_hyphen_values = true)]
    constant: Option<String>,
    /// Central-difference step for the partials identity
    #[arg(long, default_value_t = crate::verify::DEFAULT_STEP)]
    step: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum VariantArg {
    Triple,
    Anchored,
}

fn series_mode(path: &Path) -> Option<Mode> {
    let text = std::fs::read_to_string(path).ok()?;
    crate::series::PowerSeries2D::parse(&text).ok().map(|s| s.mode())
}

fn build_manifest(command: CommandKind, args: RunArgs) -> Result<RunManifest, CliError> {
    let mode = match args.mode {
        Some(m) => m,
        None if args.pool.is_some() => Mode::Exact,
        None => args.series.as_deref().and_then(series_mode).unwrap_or(Mode::Float),
    };
    let pool = match &args.pool {
        Some(text) => {
            if mode == Mode::Float {
                return Err(CliError::Usage("--pool needs exact mode".into()));
            }
            let points = text
                .split(',')
                .map(|s| Scalar::parse_in(Mode::Exact, s.trim()))
                .collect::<Result<Vec<_>, _>>()?;
            Some(points)
        }
        None => None,
    };
    let constant = args.constant.as_deref().map(|c| Scalar::parse_in(mode, c)).transpose()?;
    let tolerance = Tolerance::new(args.abs_tol, args.rel_tol)?;
    let quadrature = QuadratureConfig::new(args.quad_tol, QuadratureConfig::default().max_subdivisions)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let min_gap = args.min_gap.unwrap_or(match mode {
        Mode::Float => 1e-3,
        Mode::Exact => 0.0,
    });
    Ok(RunManifest {
        command,
        demo: None,
        expr: args.expr,
        series: args.series,
        deriv: args.deriv,
        criterion: args.criterion,
        variant: match args.variant {
            VariantArg::Triple => AlgebraicVariant::Triple,
            VariantArg::Anchored => AlgebraicVariant::Anchored,
        },
        seed: args.seed,
        count: args.count,
        min_gap,
        mode,
        pool,
        tolerance,
        quadrature,
        constant,
        step: args.step,
        out: args.output.out,
        function_out: args.output.function_out,
        timing: args.output.timing,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// Runs `manifest`, writes its outputs and returns the exit status.
fn finish(manifest: &RunManifest, out: Option<&Path>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let outcome = execute(manifest)?;
    let json = outcome.report.to_json();
    match out {
        Some(path) => {
            write_file(path, &json)?;
            let _ = writeln!(stderr, "{:?}: report written to {}", outcome.report.verdict, path.display());
        }
        None => {
            stdout.write_all(json.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    if let (Some(path), Some(text)) = (&manifest.function_out, &outcome.function_file) {
        write_file(path, text)?;
    }
    Ok(outcome.report.exit_code)
}

fn dispatch(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let (manifest, out) = match cli.command {
        Command::Check(args) => build_manifest(CommandKind::Check, args).map(|m| (m.clone(), m.out))?,
        Command::Recover(args) => build_manifest(CommandKind::Recover, args).map(|m| (m.clone(), m.out))?,
        Command::Verify(args) => build_manifest(CommandKind::Verify, args).map(|m| (m.clone(), m.out))?,
        Command::Demo { name, output } => {
            let m = RunManifest {
                out: output.out.clone(),
                function_out: output.function_out,
                timing: output.timing,
                ..demo::manifest(name)
            };
            (m, output.out)
        }
        Command::Replay { report, out } => {
            let text = std::fs::read_to_string(&report)
                .map_err(|e| CliError::Io(format!("cannot read {}: {e}", report.display())))?;
            let value: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", report.display())))?;
            let manifest: RunManifest = serde_json::from_value(value.get("manifest").cloned().unwrap_or_default())
                .map_err(|e| CliError::Usage(format!("{}: bad manifest: {e}", report.display())))?;
            let outcome = execute(&manifest)?;
            let json = outcome.report.to_json();
            if json != text {
                let _ = writeln!(stderr, "replay differs from {}", report.display());
            }
            match out {
                Some(path) => write_file(&path, &json)?,
                None => stdout.write_all(json.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?,
            }
            return Ok(outcome.report.exit_code);
        }
    };
    finish(&manifest, out.as_deref(), stdout, stderr)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(rendered.as_bytes()) } else { stdout.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}
