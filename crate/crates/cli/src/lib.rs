//! Batch front end: config loading, the five subcommands and report writing.

pub mod commands;
pub mod config;
pub mod report;

use std::path::PathBuf;

use fundsol_core::Error;

use crate::config::{FlagDefaults, RunConfig, VariantFlag};
use crate::report::Outcome;

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DEGENERATE: i32 = 2;
pub const EXIT_MODULE: i32 = 3;
pub const EXIT_ASSERTION: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::DegenerateSymbol { .. }) => EXIT_DEGENERATE,
            CliError::Core(_) => EXIT_MODULE,
            _ => EXIT_USAGE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Validate,
    Eval,
    Verify,
    Constants,
    Leray,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Eval => "eval",
            Command::Verify => "verify",
            Command::Constants => "constants",
            Command::Leray => "leray",
        }
    }
}

#[derive(Debug, Clone, clap::Parser)]
#[command(name = "fundsol", version, about = "Fundamental solutions of homogeneous operators of real principal type")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// JSON run config; its entries take precedence over the flags below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub variant: Option<VariantFlag>,
    #[arg(long)]
    pub budget_scale: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Loads the config, runs the command and returns its outcome (not yet written).
pub fn execute(args: &Args) -> Result<Outcome, CliError> {
    let cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let flags = FlagDefaults {
        variant: args.variant,
        budget_scale: args.budget_scale,
        out: args.out.clone(),
    };
    let r = cfg.resolve(args.config.as_deref(), &flags)?;
    let mut outcome = match args.command {
        Command::Validate => commands::validate(&r),
        Command::Eval => commands::eval(&r),
        Command::Verify => commands::verify(&r),
        Command::Constants => commands::constants(&r),
        Command::Leray => commands::leray(&r),
    }?;
    outcome.out = r.out;
    Ok(outcome)
}

/// Runs the command, prints the text summary and writes the output directory.
pub fn run(args: &Args) -> i32 {
    let outcome = match execute(args) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("fundsol {}: {e}", args.command.name());
            return e.exit_code();
        }
    };
    print!("{}", outcome.report.to_text());
    if let Some(dir) = &outcome.out {
        if let Err(e) = outcome.write(dir) {
            eprintln!("fundsol {}: {e}", args.command.name());
            return EXIT_USAGE;
        }
    }
    outcome.exit_code
}
