use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pgate::config::{RunConfig, SCHEMA};
use pgate::{Command, Format};

#[derive(Parser)]
#[command(name = "pgate", version, about = "Polarization-gradient MS gate simulator")]
struct Cli {
    #[command(subcommand)]
    action: Action,
}

#[derive(Subcommand)]
enum Action {
    /// Run a simulation and write its datasets.
    #[command(flatten)]
    Run(RunAction),
    /// Print the run-config JSON schema.
    Schema,
    /// Print the default run config.
    Defaults,
}

#[derive(Subcommand)]
enum RunAction {
    /// Focal Rabi profile from the field model, with its fit.
    Profile(Args),
    /// Axial normal modes of the chain.
    Modes(Args),
    /// Population and parity trajectory through the gate.
    Gate(Args),
    /// Analysis-phase parity sweep after the gate.
    Parity(Args),
    /// Per-channel and joint infidelity budget.
    Budget(Args),
    /// Light-shift map and tweezer summary.
    Stark(Args),
    /// Simulated beam-position scan and its fit.
    Scan(Args),
    /// AOM tone plan for the gate.
    Tones(Args),
}

#[derive(clap::Args)]
struct Args {
    /// Run config (JSON); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let err = pgate::CliError::config(e.to_string());
                eprintln!("{}", err.to_json());
                return ExitCode::from(err.exit_code() as u8);
            }
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let (command, args) = match cli.action {
        Action::Schema => {
            print!("{SCHEMA}");
            return ExitCode::SUCCESS;
        }
        Action::Defaults => {
            println!("{}", serde_json::to_string_pretty(&RunConfig::default()).expect("config serializes"));
            return ExitCode::SUCCESS;
        }
        Action::Run(r) => match r {
            RunAction::Profile(a) => (Command::Profile, a),
            RunAction::Modes(a) => (Command::Modes, a),
            RunAction::Gate(a) => (Command::Gate, a),
            RunAction::Parity(a) => (Command::Parity, a),
            RunAction::Budget(a) => (Command::Budget, a),
            RunAction::Stark(a) => (Command::Stark, a),
            RunAction::Scan(a) => (Command::Scan, a),
            RunAction::Tones(a) => (Command::Tones, a),
        },
    };
    match pgate::run(command, args.config.as_deref(), &args.out, args.seed, args.format) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
