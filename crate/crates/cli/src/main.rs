//! `weyldyn`: run kernel, Weyl, wave and validation scenarios from a config
//! file and write CSV/JSON artifacts.
//!
//! Exit codes: 0 success, 1 usage or config error, 2 Neumann series did not
//! converge, 3 spectral point outside the convergence region, 4 a check or
//! acceptance criterion failed.

// `!(a > b)` is used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "weyldyn", version, about = "Weyl solution and m-function from the wave kernel")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario file (`[section]` / `key = value`).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory, created if missing.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// Evaluate spectral points below the convergence threshold anyway.
    #[arg(long, global = true)]
    force: bool,

    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "WEYLDYN_THREADS", value_name = "N")]
    threads: Option<usize>,

    /// Neumann-series tolerance, overriding the config.
    #[arg(long, global = true, value_name = "X")]
    tol: Option<f64>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Solve for the kernel; writes kernel.csv and a bound-check report.
    Kernel,
    /// m-function by every route on a k-grid; writes mfunc.csv and weyl.csv.
    Weyl,
    /// Wave field and response function for a power-law control.
    Wave,
    /// Run the full acceptance suite.
    Validate,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Kernel => "kernel",
            Command::Weyl => "weyl",
            Command::Wave => "wave",
            Command::Validate => "validate",
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    NoConvergence(String),
    Region(String),
    Failed(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::NoConvergence(_) => 2,
            CliError::Region(_) => 3,
            CliError::Failed(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::NoConvergence(m) | CliError::Region(m) | CliError::Failed(m) => m,
        }
    }
}

impl From<weyldyn::Error> for CliError {
    fn from(e: weyldyn::Error) -> Self {
        use weyldyn::Error as E;
        match e {
            E::NoConvergence { .. } => CliError::NoConvergence(e.to_string()),
            E::Region { .. } => CliError::Region(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

pub struct Options {
    pub out: PathBuf,
    pub force: bool,
    pub tol: Option<f64>,
    pub threads: usize,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let threads = match cli.threads {
        Some(0) => return Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    if let Some(tol) = cli.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(CliError::Usage(format!("--tol must be positive, got {tol}")));
        }
    }
    let cfg = match &cli.config {
        Some(path) => config::Config::load(path)?,
        None if cli.command == Command::Validate => config::Config::default(),
        None => return Err(CliError::Usage(format!("`{}` needs --config PATH", cli.command.name()))),
    };
    std::fs::create_dir_all(&cli.out)
        .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", cli.out.display())))?;
    let opts = Options {
        out: cli.out,
        force: cli.force,
        tol: cli.tol,
        threads,
    };
    match cli.command {
        Command::Kernel => commands::kernel(&cfg, &opts),
        Command::Weyl => commands::weyl(&cfg, &opts),
        Command::Wave => commands::wave(&cfg, &opts),
        Command::Validate => commands::validate(&cfg, &opts),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("weyldyn: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
