//! `popdyn`: drive the whole pipeline from model file to error report.
//!
//! Subcommands mirror the workflow: validate, simulate, make-dataset,
//! train, generate, evaluate, bench. Outputs are machine-readable (JSON on
//! stdout, CSV/JSON files on disk); given the same inputs and seeds every
//! artifact is reproduced byte for byte, apart from the timing sidecars.
//! Exit codes: 0 ok, 2 usage, 3 data error, 4 numeric divergence.

mod args;
mod config;
mod error;
mod model;
mod run;

use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = args::Cli::parse();
    if let Err(e) = run::run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
