//! `ustat-lab`: runs the U-statistics experiments and writes reports plus a
//! reproducibility manifest.
//!
//! Exit status is 0 when every built-in assertion passes, 1 when one fails
//! and 2 on a usage or configuration error.

mod commands;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ergodic_ustat::oscillate::IndexLadder;
use ergodic_ustat::report::{Assertion, ExperimentReport};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "ustat-lab", version, about = "Ergodic U-statistics experiments")]
struct Cli {
    /// Base seed; every replicate seed is derived from it.
    #[arg(long, global = true, env = "UL_SEED", default_value_t = 0)]
    seed: u64,

    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Report path; the manifest goes next to it. Without it the report is
    /// printed on stdout and the manifest on stderr.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact sums of the oscillating bounded kernel along the index ladder.
    Example1(Example1Args),
    /// Distribution of the centered statistic for the unbounded kernel.
    Example2(Example2Args),
    /// Almost-sure convergence trajectories for a bounded kernel.
    TheoremAs(TheoremArgs),
    /// L¹ error curve E|U_n - target|.
    TheoremL1(TheoremArgs),
    /// Empirical integrals of the trigonometric test family.
    WeakConv(WeakArgs),
    /// Series against naive evaluation and the U/V identity.
    EngineCheck(EngineArgs),
    /// Checks a ladder file against every ladder invariant.
    ValidateLadder(ValidateArgs),
    /// Writes the default ladder as JSON.
    Ladder(LadderArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct Example1Args {
    #[arg(long, default_value_t = 12)]
    pub levels: usize,
    /// Ladder JSON file used instead of the default ladder.
    #[arg(long)]
    pub ladder_file: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Example2Mode {
    /// Y_n against N(0, 1/4).
    Clt,
    /// Variance of Y_{2n} - Y_n.
    Gap,
    /// Exact sums of squared martingale differences.
    Mcleish,
}

#[derive(Args, Debug, Serialize)]
pub struct Example2Args {
    #[arg(long, value_enum, default_value_t = Example2Mode::Clt)]
    pub mode: Example2Mode,
    #[arg(long, default_value_t = 4096)]
    pub n: usize,
    #[arg(long, default_value_t = 20_000)]
    pub reps: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct ProcessArgs {
    /// Process name or JSON object, e.g. '{"kind":"gaussian-ar1","rho":0.5}'.
    #[arg(long, default_value = "doubling-map")]
    pub process: String,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
pub struct TheoremArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub process: ProcessArgs,
    #[arg(long, default_value = "cos-diff")]
    pub kernel: String,
    /// Largest n; the grid is geometric from 2 unless --grid is given.
    #[arg(long, default_value_t = 5000)]
    pub n: usize,
    #[arg(long, default_value_t = 50)]
    pub reps: usize,
    /// Comma-separated grid overriding the geometric one.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0.05)]
    pub tol: f64,
    /// Known ∬h dF dF; otherwise analytic or estimated.
    #[arg(long)]
    pub target: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
pub struct WeakArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub process: ProcessArgs,
    #[arg(long, value_delimiter = ',', default_value = "1,10,100,1000,10000")]
    pub grid: Vec<usize>,
    #[arg(long, default_value_t = 0.05)]
    pub tol: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct EngineArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub process: ProcessArgs,
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    /// Restricts the check to one kernel.
    #[arg(long)]
    pub kernel: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct ValidateArgs {
    pub path: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct LadderArgs {
    #[arg(long, default_value_t = 12)]
    pub levels: usize,
}

/// What a subcommand produced.
pub struct Outcome {
    pub report: ExperimentReport,
    pub assertions: Vec<Assertion>,
    /// Extra files as (suffix, contents), written next to the report.
    pub extras: Vec<(String, String)>,
    /// Additional manifest fields.
    pub summary: Option<Value>,
}

/// A failure that maps to exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl From<ergodic_ustat::Error> for UsageError {
    fn from(e: ergodic_ustat::Error) -> Self {
        UsageError(e.to_string())
    }
}

fn config_echo(command: &Command) -> (&'static str, Value) {
    let (name, v) = match command {
        Command::Example1(a) => ("example1", serde_json::to_value(a)),
        Command::Example2(a) => ("example2", serde_json::to_value(a)),
        Command::TheoremAs(a) => ("theorem-as", serde_json::to_value(a)),
        Command::TheoremL1(a) => ("theorem-l1", serde_json::to_value(a)),
        Command::WeakConv(a) => ("weak-conv", serde_json::to_value(a)),
        Command::EngineCheck(a) => ("engine-check", serde_json::to_value(a)),
        Command::ValidateLadder(a) => ("validate-ladder", serde_json::to_value(a)),
        Command::Ladder(a) => ("ladder", serde_json::to_value(a)),
    };
    (name, v.expect("argument structs serialize"))
}

fn run(cli: &Cli) -> Result<Outcome, UsageError> {
    let seed = cli.seed;
    match &cli.command {
        Command::Example1(a) => commands::example1(a, seed),
        Command::Example2(a) => commands::example2(a, seed),
        Command::TheoremAs(a) => commands::theorem_as(a, seed),
        Command::TheoremL1(a) => commands::theorem_l1(a, seed),
        Command::WeakConv(a) => commands::weak_conv(a, seed),
        Command::EngineCheck(a) => commands::engine_check(a, seed),
        Command::ValidateLadder(a) => commands::validate_ladder(a, seed),
        Command::Ladder(_) => unreachable!("handled before dispatch"),
    }
}

/// `r.csv` → `r.<suffix>`.
fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.{suffix}"))
}

fn write(path: &Path, contents: &str) -> Result<(), UsageError> {
    std::fs::write(path, contents).map_err(|e| UsageError(format!("cannot write {}: {e}", path.display())))
}

fn execute(cli: &Cli) -> Result<bool, UsageError> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global()
            .map_err(|e| UsageError(e.to_string()))?;
    }
    if let Command::Ladder(a) = &cli.command {
        let text = IndexLadder::default_ladder(a.levels)?.to_json() + "\n";
        match &cli.out {
            Some(out) => write(out, &text)?,
            None => print!("{text}"),
        }
        return Ok(true);
    }
    let (name, config) = config_echo(&cli.command);
    let started = Instant::now();
    let outcome = run(cli)?;
    let wall = started.elapsed().as_secs_f64();

    let body = match cli.format {
        Format::Csv => outcome.report.to_csv()?,
        Format::Json => outcome.report.to_json()?,
    };
    let passed = outcome.assertions.iter().all(|a| a.passed);
    let mut outputs = Vec::new();
    if let Some(out) = &cli.out {
        write(out, &body)?;
        outputs.push(out.display().to_string());
        for (suffix, contents) in &outcome.extras {
            let p = sibling(out, suffix);
            write(&p, contents)?;
            outputs.push(p.display().to_string());
        }
    } else {
        print!("{body}");
    }
    let manifest = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "experiment": name,
        "config": config,
        "seed": cli.seed,
        "threads": cli.threads,
        "format": match cli.format { Format::Csv => "csv", Format::Json => "json" },
        "wall_time_seconds": wall,
        "outputs": outputs,
        "summary": outcome.summary,
        "assertions": outcome.assertions,
        "failed": outcome.assertions.iter().filter(|a| !a.passed).map(|a| a.name.clone()).collect::<Vec<_>>(),
        "passed": passed,
    });
    let manifest = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    match &cli.out {
        Some(out) => write(&sibling(out, "manifest.json"), &manifest)?,
        None => eprint!("{manifest}"),
    }
    for a in outcome.assertions.iter().filter(|a| !a.passed) {
        eprintln!("assertion failed: {}: {}", a.name, a.detail);
    }
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
