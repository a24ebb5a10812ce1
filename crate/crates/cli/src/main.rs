//! `specdegen`: spectra of degenerating families from the command line.
//!
//! Exit codes: 0 success, 1 golden-check mismatch, 2 usage or validation
//! error, 3 the requested resolution was refused.

mod commands;
mod config;
mod emit;
mod error;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::airy::AiryCommand;
use commands::campaign::CampaignArgs;
use commands::domain::DomainCommand;
use commands::forms::FormsCommand;
use commands::golden::GoldenArgs;
use commands::halfline::HalfLineCommand;
use commands::product::ProductCommand;
use error::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "specdegen",
    version,
    about = "Spectra of degenerating quadratic-form families"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Airy functions and zeros.
    #[command(subcommand)]
    Airy(AiryCommand),
    /// Weighted half-line eigenproblems.
    #[command(subcommand)]
    Halfline(HalfLineCommand),
    /// Separated product spectra and the cylinder.
    #[command(subcommand)]
    Product(ProductCommand),
    /// Finite-dimensional forms: quasimode campaigns and branch tracking.
    #[command(subcommand)]
    Forms(FormsCommand),
    /// Thin triangle and sector spectra.
    #[command(subcommand)]
    Domain(DomainCommand),
    /// Run a config-driven campaign.
    Campaign(CampaignArgs),
    /// Re-run a campaign and compare with its golden CSV.
    GoldenCheck(GoldenArgs),
}

/// Caps the global pool at SPECDEGEN_THREADS when set.
fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("SPECDEGEN_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        CliError::Validation(format!(
            "SPECDEGEN_THREADS must be a positive integer, got `{v}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Validation(format!("thread pool: {e}")))
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    init_threads()?;
    match &cli.command {
        Command::Airy(c) => commands::airy::run(c),
        Command::Halfline(c) => commands::halfline::run(c),
        Command::Product(c) => commands::product::run(c),
        Command::Forms(c) => commands::forms::run(c),
        Command::Domain(c) => commands::domain::run(c),
        Command::Campaign(a) => commands::campaign::run(a),
        Command::GoldenCheck(a) => commands::golden::run(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
