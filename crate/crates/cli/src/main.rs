//! Command-line front end: torsion tables, coflow evolution, soliton phase
//! portraits and catalogs, parameter sweeps, and the verification suites.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numerical
//! failure, 3 verification failure.

mod commands;
mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Numerical(String),
    VerificationFailed(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::VerificationFailed(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::VerificationFailed(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "g2flow",
    version,
    about = "Warped G2-structures: torsion, modified Laplacian coflow, soliton systems",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON configuration file
    #[arg(long)]
    config: PathBuf,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Output format
    #[arg(long, default_value = "csv", value_parser = ["csv", "json", "svg"])]
    format: String,
}

#[derive(Subcommand)]
enum Command {
    /// Compute torsion coordinates, components and class flags of a profile
    Torsion(RunArgs),
    /// Evolve a co-closed profile under the modified Laplacian coflow
    Flow {
        #[command(flatten)]
        run: RunArgs,
        /// Emit every Nth accepted step
        #[arg(long)]
        snapshot_stride: Option<usize>,
    },
    /// Closed-form families, soliton integration, or the constant catalog
    Soliton(RunArgs),
    /// Execute independent soliton runs from one document
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Worker threads (defaults to 1; output is identical regardless)
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Run the property suites and report pass/fail per check
    Verify {
        /// numerics, geometry, laplacian, flow, cy-soliton, nk-soliton,
        /// cli, or all
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value = "table", value_parser = ["table", "json"])]
        format: String,
        /// Write the JSON report here as well
        #[arg(long)]
        out: Option<PathBuf>,
        /// Deliberately fail one check (debugging aid for the exit-code path)
        #[arg(long, hide = true)]
        inject_failure: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints help/version through the error path with exit 0
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Torsion(run) => commands::torsion(&run.config, &run.out, &run.format),
        Command::Flow {
            run,
            snapshot_stride,
        } => commands::flow(&run.config, &run.out, snapshot_stride),
        Command::Soliton(run) => commands::soliton(&run.config, &run.out, &run.format),
        Command::Sweep { run, workers } => commands::sweep(&run.config, &run.out, workers),
        Command::Verify {
            suite,
            format,
            out,
            inject_failure,
        } => commands::verify(&suite, &format, out.as_deref(), inject_failure),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
