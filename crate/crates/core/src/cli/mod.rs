//! Command-line front end: `build`, `verify`, `hilbert`, `gk`, `probe`.
//!
//! Exit codes: 0 success, 1 a check failed, 2 configuration error, 3 a
//! resource budget was exceeded.

mod commands;
mod config;
mod suites;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{dense_limit_for_budget, load_schedule, RunConfig};
pub use suites::SUITES;

#[derive(Debug, Parser)]
#[command(name = "nilalg", version, about = "Build, verify and measure graded quotients of the free algebra on x, y")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Build the level tower and write the level store.
    Build,
    /// Run a verification suite against the level store.
    Verify,
    /// Hilbert function, cumulative dimension and growth bounds.
    Hilbert,
    /// Fitted log-log slope of the cumulative dimension.
    Gk,
    /// Membership of the homogeneous components of `poly^exponent` in E.
    Probe,
}

/// Every flag may also be given in the `--config` JSON file under the same
/// name with underscores; flags take precedence.
#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Schedule JSON file, `default` (also `default-real`) or `toy:I,J,...`.
    #[arg(long, global = true)]
    pub schedule: Option<String>,
    #[arg(long, global = true)]
    pub field: Option<u32>,
    /// dense, monomial or auto.
    #[arg(long, global = true)]
    pub engine: Option<String>,
    #[arg(long, global = true)]
    pub max_level: Option<usize>,
    #[arg(long, global = true)]
    pub max_degree: Option<usize>,
    /// Memory budget in MiB; bounds the degree the dense engine may use.
    #[arg(long, global = true)]
    pub budget_mb: Option<u64>,
    #[arg(long, global = true)]
    pub suite: Option<String>,
    /// Level store and artifact directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// json or csv.
    #[arg(long, global = true)]
    pub format: Option<String>,
    #[arg(long, global = true)]
    pub poly: Option<String>,
    #[arg(long, global = true)]
    pub exponent: Option<usize>,
    /// Slope window `N1,N2`.
    #[arg(long, global = true)]
    pub window: Option<String>,
}

/// Parses `args` (program name first), runs the command and returns the exit
/// code. Output goes to stdout, diagnostics to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = RunConfig::resolve(&cli.options).and_then(|cfg| {
        cfg.apply_budget();
        match cli.command {
            Command::Build => commands::build(&cfg),
            Command::Verify => commands::verify(&cfg),
            Command::Hilbert => commands::hilbert(&cfg),
            Command::Gk => commands::gk(&cfg),
            Command::Probe => commands::probe(&cfg),
        }
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
