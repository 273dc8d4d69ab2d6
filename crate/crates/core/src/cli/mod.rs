//! Command-line front end: `verify`, `oracle` and `decay`.
//!
//! Exit codes: 0 pass, 1 violation, 2 invalid arguments or I/O failure.
//! `POTTSLAB_THREADS` caps the worker pool.

pub mod decay;
pub mod oracle;
pub mod output;
pub mod verify;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::error::PottsError;
use output::Format;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const THREADS_ENV: &str = "POTTSLAB_THREADS";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
}

impl CliError {
    pub(crate) fn io(e: impl std::fmt::Display) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<PottsError> for CliError {
    fn from(e: PottsError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "pottslab",
    version,
    about = "Potts model on trees: exact marginals, contraction checks, decay experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run seeded sweeps of the inequality checks.
    Verify(verify::VerifyArgs),
    /// Compare the tree recursion against exhaustive enumeration.
    Oracle(oracle::OracleArgs),
    /// Measure marginal discrepancies against boundary distance.
    Decay(decay::DecayArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    pub format: Format,
    /// JSON config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long, conflicts_with = "dplus1")]
    pub d: Option<usize>,
    /// Maximum degree `d + 1`.
    #[arg(long)]
    pub dplus1: Option<usize>,
    #[arg(long, conflicts_with = "alpha")]
    pub w: Option<f64>,
    /// Sets `w = 1 - alpha q / (d + 1)`.
    #[arg(long)]
    pub alpha: Option<f64>,
}

impl ParamArgs {
    pub fn d(&self) -> Result<Option<usize>, CliError> {
        match (self.d, self.dplus1) {
            (Some(d), _) => Ok(Some(d)),
            (None, Some(n)) if n >= 1 => Ok(Some(n - 1)),
            (None, Some(n)) => Err(CliError::Usage(format!("--dplus1 {n} must be at least 1"))),
            (None, None) => Ok(None),
        }
    }
}

pub(crate) fn read_config<T: for<'de> Deserialize<'de> + Default>(path: &Option<PathBuf>) -> Result<T, CliError> {
    let Some(path) = path else { return Ok(T::default()) };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV}={value:?} is not a positive integer")))?;
    // the global pool can only be built once per process
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Verify(a) => verify::run(a),
        Command::Oracle(a) => oracle::run(a),
        Command::Decay(a) => decay::run(a),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            EXIT_USAGE
        }
    }
}
