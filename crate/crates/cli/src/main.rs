mod cli;
mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};

use cli::{Cli, Command, Common};
use error::{CliError, EXIT_CONFIG, EXIT_USAGE};

const THREADS_VAR: &str = "STEPANOV_THREADS";

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_VAR} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn run(command: Command, common: Common) -> Result<(), CliError> {
    configure_threads()?;
    let config = common.config.as_deref();
    let outcome = match command {
        Command::Norm(a) => commands::norm(a, config)?,
        Command::Ergodic(a) => commands::ergodic(a, config)?,
        Command::Translations(a) => commands::translations(a, config)?,
        Command::Modulus(a) => commands::modulus(a, config)?,
        Command::Ml(a) => commands::ml(a, config)?,
        Command::Constants(a) => commands::constants(a, config)?,
        Command::Probe(a) => commands::probe(a, config)?,
        Command::SolveFrac => commands::solve_frac(config)?,
        Command::Heat => commands::heat(config)?,
        Command::SolveEvo => commands::solve_evo(config)?,
        Command::Lotka => commands::lotka(config)?,
        Command::ComposeCheck => commands::compose_check(config)?,
    };
    let csv_path = common.out.or(outcome.output.csv);
    let json_path = common.report.or(outcome.output.json);
    // Serialise both before writing either, so a bad report leaves no partial output.
    let json = json_path.as_ref().map(|_| output::to_json(&outcome.report)).transpose()?;
    output::write_text(csv_path.as_deref(), &outcome.table.to_csv())?;
    if let (Some(path), Some(text)) = (json_path, json) {
        output::write_text(Some(&path), &text)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                ErrorKind::InvalidSubcommand
                | ErrorKind::MissingSubcommand
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = e.print();
                    eprintln!("\n{}", Cli::command().render_usage());
                    return ExitCode::from(EXIT_USAGE as u8);
                }
                _ => EXIT_CONFIG,
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli.command, cli.common) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("stepanov: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
