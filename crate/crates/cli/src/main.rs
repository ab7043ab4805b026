//! `qbayes` command-line front end.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Status;

#[derive(Debug, Parser)]
#[command(name = "qbayes", version, about = "Coherence audits, Born-rule fits and Bayesian state tomography")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON config file; flags override its values
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Seed for every random draw (required by stochastic commands)
    #[arg(long, global = true, value_name = "INT")]
    pub seed: Option<u64>,
    /// Output directory [default: .]
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Re-check all invariants of loaded inputs before running
    #[arg(long, global = true)]
    pub verify: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Audit a betting book for Dutch-book coherence
    Audit(commands::audit::AuditArgs),
    /// Fit a density operator to per-basis probabilities
    Fit(commands::fit::FitArgs),
    /// Sample i.i.d. outcomes of one basis measurement
    Sample(commands::sample::SampleArgs),
    /// Bayesian tomography with a particle prior
    Tomography(commands::tomography::TomographyArgs),
    /// Two agents updating on shared data
    DemoAgreement(commands::agreement::AgreementArgs),
    /// Check a state, book, frame, prior or record file
    Validate(commands::validate::ValidateArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Audit(args) => commands::audit::run(&cli.common, args),
        Command::Fit(args) => commands::fit::run(&cli.common, args),
        Command::Sample(args) => commands::sample::run(&cli.common, args),
        Command::Tomography(args) => commands::tomography::run(&cli.common, args),
        Command::DemoAgreement(args) => commands::agreement::run(&cli.common, args),
        Command::Validate(args) => commands::validate::run(&cli.common, args),
    };
    match result {
        Ok(Status::Success) => ExitCode::SUCCESS,
        Ok(Status::Verdict) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
