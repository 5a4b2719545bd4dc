//! `mbmlab`: kernel tables, Hurst validation, simulation, point search and
//! regularity analysis, each run leaving a reproducible `run.json`.

mod args;
mod commands;
mod plot;
mod record;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n as usize).build_global() {
            eprintln!("error: cannot start {n} workers: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut command = cli.command;
    commands::absolutize(&mut command);
    if let Command::Reproduce(r) = &command {
        return reproduce(&r.config);
    }
    let outcome = commands::execute(&command)?;
    let dir = std::path::absolute(&cli.out)?;
    record::commit(&dir, &command, &outcome)?;
    print(&outcome.stdout)
}

fn reproduce(config: &Path) -> Result<()> {
    let record = record::read_record(config)?;
    let outcome = commands::execute(&record.config)?;
    let n = record::verify(&record, &outcome)?;
    print(&format!("reproduced {} ({n} outputs identical)\n", record.config.name()))
}

fn print(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}
