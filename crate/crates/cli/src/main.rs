// SPDX-License-Identifier: Apache-2.0

use clap::Parser;
use reckit_cli::args::Cli;
use reckit_cli::{commands, exit};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::SUCCESS };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Err(e) = commands::dispatch(cli.command) {
        eprintln!("error: {e:#}");
        std::process::exit(exit::code_for(&e));
    }
}
