mod commands;
mod output;
mod settings;

use std::process::ExitCode;

use clap::Parser;
use settings::{Cli, RunConfig};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("WEYL_LOG", "warn")).init();
    let cli = Cli::parse();
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cfg = match RunConfig::resolve(cli.command, &cli.common, args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    log::debug!("resolved configuration: {cfg:?}");
    let run = || commands::dispatch(&cfg);
    let result = match cfg.workers {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(run),
            Err(e) => {
                eprintln!("error: cannot start {n} workers: {e}");
                return ExitCode::from(2);
            }
        },
        None => run(),
    };
    match result {
        Ok(outcome) if outcome.failures.is_empty() => ExitCode::SUCCESS,
        Ok(outcome) => {
            for f in &outcome.failures {
                eprintln!("assertion failed: {f}");
            }
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
