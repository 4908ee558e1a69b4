mod commands;
mod config;

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;

use commands::{run, CliError, Outcome};
use config::{Cli, Command, RunConfig};

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Tables go to `--csv` or stdout; JSON goes to `--out`, or to stdout for
/// commands without a table.
fn emit(cfg: &RunConfig, out: &Outcome) -> Result<(), CliError> {
    let mut stdout = std::io::stdout().lock();
    let mut print = |s: &str| {
        stdout.write_all(s.as_bytes()).map_err(|source| CliError::Io {
            path: "<stdout>".into(),
            source,
        })
    };
    match (&out.csv, &cfg.csv) {
        (Some(table), Some(path)) => write_file(path, table)?,
        (Some(table), None) => print(table)?,
        _ => {}
    }
    match &cfg.out {
        Some(path) => write_file(path, &out.json)?,
        None if out.csv.is_none() => print(&out.json)?,
        None => {}
    }
    Ok(())
}

fn main() -> ExitCode {
    let cfg = RunConfig::from(Cli::parse());
    let result = run(&cfg).and_then(|out| emit(&cfg, &out).map(|_| out));
    match result {
        Ok(out) if out.passed => ExitCode::SUCCESS,
        Ok(out) => {
            if let Some(d) = &out.diagnostic {
                eprintln!("{d}");
            }
            let what = match cfg.command {
                Command::Plan { .. } => "plan checks",
                Command::Witness => "witness verification",
                Command::Demo { .. } => "demo verification",
                Command::Fragment { .. } => "decomposition",
                Command::Verify { .. } => "round-trip check",
            };
            eprintln!("{what} failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
