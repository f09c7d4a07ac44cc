use std::process::ExitCode;

use clap::Parser;

use qobserver::{Cli, RunConfig};

fn main() -> ExitCode {
    let rc = RunConfig::from(Cli::parse());
    match qobserver::run(&rc) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            if !outcome.failed.is_empty() {
                eprintln!("error: failed: {}", outcome.failed.join(", "));
            }
            ExitCode::from(outcome.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
