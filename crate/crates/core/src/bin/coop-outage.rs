use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use coop_outage::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    let result = run(cli, &mut lock).and_then(|()| {
        lock.flush().map_err(|e| coop_outage::cli::CliError::Io {
            path: "<stdout>".into(),
            message: e.to_string(),
        })
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("coop-outage: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
