//! `wayfinder` — offline visual geo-localization workflows.
//!
//! Subcommands cover the two localization routes and their supporting
//! tooling: `buildmap` and `matchseq` for junction-sequence map matching,
//! `placedb` and `stitch` for SIFT place recognition, and `eval` for
//! classifier metrics.
//!
//! Exit codes: 0 success, 1 domain failure (bad data, no result), 2 usage
//! error (bad flags, missing input files). Usage errors never write
//! artifacts.

mod commands;
mod util;

use clap::{Parser, Subcommand};

use util::CliError;

#[derive(Parser)]
#[command(name = "wayfinder", version, about = "Offline visual geo-localization toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the intersection graph from GeoJSON roads
    Buildmap(commands::buildmap::Args),
    /// Match a junction-type sequence against a built map
    Matchseq(commands::matchseq::Args),
    /// Build or query a place database of SIFT descriptors
    Placedb {
        #[command(subcommand)]
        action: commands::placedb::Action,
    },
    /// Stitch overlapping frames into a panorama
    Stitch(commands::stitch::Args),
    /// Compute precision/recall/F1 from a predictions CSV
    Eval(commands::eval::Args),
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Buildmap(args) => commands::buildmap::run(args),
        Command::Matchseq(args) => commands::matchseq::run(args),
        Command::Placedb { action } => commands::placedb::run(action),
        Command::Stitch(args) => commands::stitch::run(args),
        Command::Eval(args) => commands::eval::run(args),
    };
    match result {
        Ok(()) => {}
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            std::process::exit(2);
        }
        Err(CliError::Domain(message)) => {
            eprintln!("error: {message}");
            std::process::exit(1);
        }
    }
}
