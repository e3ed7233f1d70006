//! `geomediate`: spatial mediation analysis from the command line.
//!
//! Exit codes: 0 success; 1 data or model error (a machine-readable JSON
//! object `{"code", "message"}` goes to stderr); 2 usage error.

mod commands;
mod opts;
mod runconfig;

use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use opts::{Cli, Command};

fn init_logging(verbosity: u8) {
    let level = match verbosity {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .init();
}

fn dispatch(cli: &Cli) -> geomediate::Result<()> {
    match &cli.command {
        Command::Ols(args) => commands::run_ols(args),
        Command::Moran(args) => commands::run_moran(args),
        Command::Gwr(args) => commands::run_gwr(args),
        Command::Mgwr(args) => commands::run_mgwr(args),
        Command::Mediate(args) => commands::run_mediate(args),
        Command::MediateSpatial(args) => commands::run_mediate_spatial(args),
        Command::Map(args) => commands::run_map(args),
        Command::Synth(args) => commands::run_synth(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(cli.verbose);
    if let Some(threads) = cli.threads {
        // The pool size never changes any output bytes, only wall time.
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()
        {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", json!({"code": e.code(), "message": e.to_string()}));
            ExitCode::from(1)
        }
    }
}
