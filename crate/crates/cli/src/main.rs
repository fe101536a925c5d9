use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use mptherm_core::config::{parse_scenario, scenario_to_toml, DEFAULTS};
use mptherm_core::Error;

mod pipeline;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Simulate,
    CheckReciprocity,
    CheckVariational,
    CheckEnergy,
    CheckFront,
    CheckTransform,
}

/// Simulator and theorem checks for micropolar porous thermoelasticity.
#[derive(Debug, Parser)]
#[command(name = "mptherm", version)]
pub struct Args {
    /// Pipeline to run.
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// Scenario file.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Second scenario of a reciprocity or transform pair.
    #[arg(long)]
    pub scenario_b: Option<PathBuf>,
    /// Output directory for CSV files and summary.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Number of refinement levels; level k halves h and dt k − 1 times.
    #[arg(long, default_value_t = 1)]
    pub levels: u32,
    /// Seed of the first random variation field.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 5e-3)]
    pub tol_reciprocity: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub tol_transform: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub tol_variational: f64,
    #[arg(long, default_value_t = 1e-5)]
    pub tol_energy: f64,
    /// Relative error allowed on the front speed.
    #[arg(long, default_value_t = 0.1)]
    pub tol_front: f64,
    /// Relative level defining the thermal front.
    #[arg(long, default_value_t = 0.05)]
    pub front_threshold: f64,
    /// Print the parsed scenario as a self-contained file and exit.
    #[arg(long)]
    pub print_scenario: bool,
    /// Print every scenario key with its default and exit.
    #[arg(long)]
    pub print_defaults: bool,
}

fn fail(e: &Error) -> ExitCode {
    let body = serde_json::json!({ "error": e.code(), "message": e.to_string() });
    eprintln!("{body}");
    ExitCode::from(2)
}

fn run(args: Args) -> Result<bool, Error> {
    if args.print_defaults {
        print!("{DEFAULTS}");
        return Ok(true);
    }
    if args.print_scenario {
        let path = args.scenario.as_ref().ok_or_else(|| missing("scenario"))?;
        print!("{}", scenario_to_toml(&parse_scenario(path)?));
        return Ok(true);
    }
    let command = args.command.ok_or_else(|| missing("command"))?;
    pipeline::dispatch(command, &args)
}

pub fn missing(what: &str) -> Error {
    Error::Validation {
        path: what.into(),
        message: "required".into(),
    }
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            e.exit()
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            return fail(&Error::Validation {
                path: "arguments".into(),
                message: first.to_string(),
            });
        }
    };
    match run(args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => fail(&e),
    }
}
