//! Command-line front end.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::comparator::{bootstrap_se, fit_nmle, BootstrapOptions, EmOptions, Estimator};
use crate::data;
use crate::deconvolve::{estimate_g0, isotonic};
use crate::error::Error;
use crate::harness::{run_experiment, ScenarioSpec, FULL_REPLICATIONS};
use crate::identifiability::verdict;
use crate::objective::MixtureParams;
use crate::optimize::{fit_general, FitOptions, FitResult};
use crate::sample::Sample;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_FIT: i32 = 3;
pub const EXIT_SINGULAR: i32 = 4;

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  invalid arguments or parameters
  2  unreadable, unwritable or malformed file
  3  estimation failed
  4  lambda1 too close to 1/2 to recover the component distribution";

#[derive(Debug, Parser)]
#[command(
    name = "symmix",
    version,
    about = "Semiparametric location mixtures of a symmetric distribution",
    after_help = EXIT_CODES
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a k-component mixture and write the estimate as JSON
    #[command(after_help = EXIT_CODES)]
    Fit(FitArgs),
    /// Estimate the component CDF of a two-component fit and write it as CSV
    #[command(after_help = EXIT_CODES)]
    G0(G0Args),
    /// Check whether a parameter point is identifiable for every symmetric component
    #[command(after_help = EXIT_CODES)]
    Ident(IdentArgs),
    /// Bootstrap standard errors of a fit
    #[command(after_help = EXIT_CODES)]
    Boot(BootArgs),
    /// Run a simulation scenario and write result CSV and summary JSON
    #[command(after_help = EXIT_CODES)]
    Sim(SimArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Semiparametric minimum-distance estimator
    Sp,
    /// Equal-variance normal mixture maximum likelihood
    Nmle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BootMethod {
    /// Semiparametric minimum-distance estimator
    Sp,
    /// Equal-variance normal mixture maximum likelihood
    Nmle,
    /// One-component location estimate
    K1,
}

#[derive(Debug, Args)]
#[group(id = "source", required = true, multiple = false)]
pub struct InputArgs {
    /// Input CSV, one value per line (first column; '#' starts a comment)
    #[arg(group = "source")]
    pub input: Option<PathBuf>,
    /// Use the bundled Old Faithful waiting times instead of INPUT
    #[arg(long, group = "source")]
    pub faithful: bool,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub source: InputArgs,
    /// Number of components (1, 2 or 3)
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = Method::Sp)]
    pub method: Method,
    /// Distance exponent, 1 <= p, or "inf"
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Seed for extra random starts
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Extra starts at random sample quantiles
    #[arg(long, default_value_t = 0)]
    pub restarts: usize,
    /// Write JSON here instead of standard output
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct G0Args {
    #[command(flatten)]
    pub source: InputArgs,
    /// Use the estimate in this `fit` JSON instead of fitting
    #[arg(long)]
    pub from_fit: Option<PathBuf>,
    /// Replace the curve by its monotone (isotonic) version
    #[arg(long)]
    pub isotonic: bool,
    /// Write CSV here instead of standard output
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IdentArgs {
    /// Number of components (1, 2 or 3)
    #[arg(long)]
    pub k: usize,
    /// Comma-separated weights, normalized to sum to one
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub lambda: Vec<f64>,
    /// Comma-separated strictly increasing locations
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub mu: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct BootArgs {
    #[command(flatten)]
    pub source: InputArgs,
    #[arg(long, value_enum, default_value_t = BootMethod::Sp)]
    pub method: BootMethod,
    /// Number of resamples
    #[arg(long = "B", short = 'B', default_value_t = 200)]
    pub resamples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Refit each resample from the point estimate only
    #[arg(long)]
    pub warm_start: bool,
    /// Write JSON here instead of standard output
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    /// Scenario JSON
    pub scenario: PathBuf,
    /// Run 200 replications instead of the scenario's count
    #[arg(long)]
    pub full_replications: bool,
    /// Directory for the result files
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
}

/// A failure with its exit code and the stage that produced it.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub stage: &'static str,
    pub message: String,
}

impl CliError {
    fn new(code: i32, stage: &'static str, message: impl ToString) -> Self {
        Self {
            code,
            stage,
            message: message.to_string(),
        }
    }

    fn input(e: Error) -> Self {
        Self::new(EXIT_IO, "input", e)
    }

    fn output(e: impl ToString) -> Self {
        Self::new(EXIT_IO, "output", e)
    }

    fn estimate(stage: &'static str, e: Error) -> Self {
        let code = match e {
            Error::NonInvertibleMixing(_) => EXIT_SINGULAR,
            Error::InvalidOption(_) | Error::InvalidExponent(_) | Error::UnsupportedK(_) => EXIT_USAGE,
            _ => EXIT_FIT,
        };
        Self::new(code, stage, e)
    }
}

type CliResult<T = ()> = std::result::Result<T, CliError>;

fn load(source: &InputArgs) -> CliResult<Sample> {
    if source.faithful {
        return Ok(data::faithful());
    }
    let path = source.input.as_ref().expect("clap enforces a source");
    Sample::from_csv_path(path).map_err(CliError::input)
}

/// Sends structured output to a file or to standard output; the human-readable
/// summary goes to whichever stream the structured output does not use.
fn emit(
    output: Option<&Path>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
    body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
    summary: &str,
) -> CliResult {
    match output {
        Some(path) => {
            let mut f = BufWriter::new(File::create(path).map_err(CliError::output)?);
            body(&mut f).and_then(|_| f.flush()).map_err(CliError::output)?;
            write!(stdout, "{summary}").map_err(CliError::output)
        }
        None => {
            body(stdout).map_err(CliError::output)?;
            write!(stderr, "{summary}").map_err(CliError::output)
        }
    }
}

fn json_body<T: serde::Serialize>(value: &T) -> impl FnOnce(&mut dyn Write) -> std::io::Result<()> + '_ {
    move |w: &mut dyn Write| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)
    }
}

fn table_line(method: &str, row: [f64; 4]) -> String {
    format!(
        "{method:<6}{:>10.2}{:>10.2}{:>10.3}{:>10.2}\n",
        row[0], row[1], row[2], row[3]
    )
}

fn cmd_fit(a: &FitArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult {
    let sample = load(&a.source)?;
    match a.method {
        Method::Sp => {
            let opts = FitOptions {
                p: a.p,
                seed: a.seed,
                random_restarts: a.restarts,
                ..FitOptions::default()
            };
            let fit = fit_general(&sample, a.k, &opts).map_err(|e| CliError::estimate("fit", e))?;
            let summary = match fit.table_row() {
                Some(row) => table_line("SP", row),
                None => format!(
                    "SP    weights {:?} locations {:?}\n",
                    fit.params.weights(),
                    fit.params.locations()
                ),
            };
            emit(a.output.as_deref(), stdout, stderr, json_body(&fit), &summary)
        }
        Method::Nmle => {
            if a.k != 2 {
                return Err(CliError::new(EXIT_USAGE, "arguments", "--method nmle requires --k 2"));
            }
            let fit = fit_nmle(&sample, &EmOptions::default()).map_err(|e| CliError::estimate("fit", e))?;
            let summary = table_line("NMLE", fit.table_row());
            emit(a.output.as_deref(), stdout, stderr, json_body(&fit), &summary)
        }
    }
}

fn cmd_g0(a: &G0Args, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult {
    let sample = load(&a.source)?;
    let params: MixtureParams = match &a.from_fit {
        Some(path) => {
            let file = File::open(path).map_err(|e| CliError::input(e.into()))?;
            let fit: FitResult =
                serde_json::from_reader(BufReader::new(file)).map_err(|e| CliError::input(e.into()))?;
            fit.params
        }
        None => {
            fit_general(&sample, 2, &FitOptions::default())
                .map_err(|e| CliError::estimate("fit", e))?
                .params
        }
    };
    let result = estimate_g0(&sample, &params).map_err(|e| CliError::estimate("g0", e))?;
    let curve = if a.isotonic { isotonic(&result.g0) } else { result.g0.clone() };
    let summary = format!("monotone_violation = {:.6e}\n", result.monotone_violation);
    emit(a.output.as_deref(), stdout, stderr, |w| curve.write_csv(w), &summary)
}

fn cmd_ident(a: &IdentArgs, stdout: &mut dyn Write) -> CliResult {
    if a.lambda.len() != a.k || a.mu.len() != a.k {
        return Err(CliError::new(
            EXIT_USAGE,
            "arguments",
            format!(
                "--k {} needs {} weights and {} locations (got {} and {})",
                a.k,
                a.k,
                a.k,
                a.lambda.len(),
                a.mu.len()
            ),
        ));
    }
    let params = MixtureParams::from_proportional(a.lambda.clone(), a.mu.clone())
        .map_err(|e| CliError::new(EXIT_USAGE, "arguments", e))?;
    let v = verdict(&params);
    json_body(&v)(stdout).map_err(CliError::output)
}

fn cmd_boot(a: &BootArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult {
    let sample = load(&a.source)?;
    let estimator = match a.method {
        BootMethod::Sp => Estimator::Sp(FitOptions::default()),
        BootMethod::Nmle => Estimator::Nmle(EmOptions::default()),
        BootMethod::K1 => Estimator::K1,
    };
    let opts = BootstrapOptions {
        resamples: a.resamples,
        seed: a.seed,
        warm_start: a.warm_start,
    };
    let report = bootstrap_se(&sample, &estimator, &opts).map_err(|e| CliError::estimate("bootstrap", e))?;
    let summary = format!("{}failures: {} of {}\n", report.table(), report.failures, report.resamples);
    emit(a.output.as_deref(), stdout, stderr, json_body(&report), &summary)
}

fn cmd_sim(a: &SimArgs, stdout: &mut dyn Write) -> CliResult {
    let mut spec = ScenarioSpec::from_json_path(&a.scenario).map_err(|e| match e {
        Error::InvalidScenario(_) => CliError::new(EXIT_USAGE, "scenario", e),
        e => CliError::input(e),
    })?;
    if a.full_replications {
        spec.replications = FULL_REPLICATIONS;
    }
    let result = run_experiment(&spec).map_err(|e| CliError::estimate("simulation", e))?;
    let stem = a
        .scenario
        .file_stem()
        .map_or_else(|| "scenario".to_string(), |s| s.to_string_lossy().into_owned());
    let (csv, json) = result
        .write_files(&a.output_dir, &stem)
        .map_err(CliError::output)?;
    writeln!(stdout, "{}\n{}", csv.display(), json.display()).map_err(CliError::output)
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{text}")
            } else {
                write!(stdout, "{text}")
            };
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Fit(a) => cmd_fit(a, stdout, stderr),
        Command::G0(a) => cmd_g0(a, stdout, stderr),
        Command::Ident(a) => cmd_ident(a, stdout),
        Command::Boot(a) => cmd_boot(a, stdout, stderr),
        Command::Sim(a) => cmd_sim(a, stdout),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}: {}", e.stage, e.message);
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(args.iter().copied(), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn ident_case_a2() {
        let (code, out, _) = run_capture(&["symmix", "ident", "--k", "3", "--lambda", "4,3,2", "--mu", "0,4,6"]);
        assert_eq!(code, 0);
        assert!(out.contains("\"CASE_A2\""), "{out}");
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run_capture(&["symmix", "fit"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["symmix", "fit", "--bogus", "x.csv"]).0, EXIT_USAGE);
        assert_eq!(
            run_capture(&["symmix", "ident", "--k", "2", "--lambda", "1,2,3", "--mu", "0,1"]).0,
            EXIT_USAGE
        );
        assert_eq!(run_capture(&["symmix", "fit", "--k", "5", "--faithful"]).0, EXIT_USAGE);
    }

    #[test]
    fn missing_file_exits_two() {
        let (code, _, err) = run_capture(&["symmix", "fit", "/nonexistent/x.csv"]);
        assert_eq!(code, EXIT_IO);
        assert!(err.starts_with("error: input:"));
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run_capture(&["symmix", "--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("Exit codes:"));
    }
}
