//! `landscape`: CLI around the landscape-law library. Exit codes: 0 all
//! checks pass, 1 a hard check failed, 2 configuration error, 3 numerical
//! failure.

mod artifact;
mod cli;
mod commands;
mod config;

use clap::Parser;
use std::process::ExitCode;

fn main() -> ExitCode {
    let parsed = cli::Cli::parse();
    let run = || commands::run_command(&parsed);
    let outcome = if parsed.threads > 0 {
        match rayon::ThreadPoolBuilder::new()
            .num_threads(parsed.threads)
            .build()
        {
            Ok(pool) => pool.install(run),
            Err(e) => {
                eprintln!("error: thread pool: {e}");
                return ExitCode::from(commands::EXIT_CONFIG);
            }
        }
    } else {
        run()
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(commands::exit_code_for(&e))
        }
    }
}
