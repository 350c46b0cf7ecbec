use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cvqkd_fading_cli::{run, Protocol, SweepArgs};

/// Secret-key rates of CV-QKD protocols over fading lossy channels.
#[derive(Parser, Debug)]
#[command(name = "cvqkd-fading", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One-way coherent-state protocol with reverse reconciliation
    Oneway(SweepArgs),
    /// Two-user MDI protocol in the symmetric configuration
    Mdi(SweepArgs),
    /// Three-user conferencing network in the star configuration
    Net3(SweepArgs),
    /// PLOB bound averaged over the fading distribution
    Plob(SweepArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (protocol, args) = match cli.command {
        Command::Oneway(a) => (Protocol::Oneway, a),
        Command::Mdi(a) => (Protocol::Mdi, a),
        Command::Net3(a) => (Protocol::Net3, a),
        Command::Plob(a) => (Protocol::Plob, a),
    };
    match run(protocol, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
