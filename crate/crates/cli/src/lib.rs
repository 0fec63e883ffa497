//! Command-line driver for the `ancient-ricci` toolkit.
//!
//! [`run`] parses arguments, resolves settings from flags and an optional
//! config file, runs one command, and writes `report.csv` and
//! `manifest.txt` into the output directory. Exit codes: 0 when every
//! check passes, 1 when any check fails or a computation breaks down,
//! 2 for usage, configuration and input errors.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod family;
pub mod report;
pub mod snapshot;

use std::ffi::OsString;
use std::fs;

use clap::Parser;

use config::{Cli, Command, Settings};
use error::CliError;
use report::{write_file, Report, RunManifest};

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command, &cli.flags) {
        Ok(report) => {
            for r in report.rows.iter().filter(|r| r.status == report::Status::Fail) {
                eprintln!("FAIL {}::{} {}: value {:e} at {}", r.module, r.operation, r.check, r.value, r.location);
            }
            let failures = report.failures();
            println!("{}: {} checks, {failures} failed", cli.command.name(), report.rows.len());
            i32::from(failures > 0)
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: Command, flags: &config::Flags) -> Result<Report, CliError> {
    let settings = Settings::resolve(flags)?;
    fs::create_dir_all(&settings.out).map_err(|e| CliError::io(&settings.out, e))?;
    let manifest = RunManifest::new(command.name(), &settings);
    write_file(&settings.out, "manifest.txt", manifest.render(&settings))?;
    let mut report = Report::default();
    match command {
        Command::Bryant => commands::bryant(&settings, &mut report)?,
        Command::Evolve => commands::evolve_cmd(&settings, &mut report)?,
        Command::Diagnose => commands::diagnose(&settings, &mut report)?,
        Command::Compare => commands::compare(&settings, &mut report)?,
        Command::SpectralSelftest => commands::spectral_selftest(&settings, &mut report)?,
    }
    write_file(&settings.out, "report.csv", report.to_csv())?;
    Ok(report)
}
