//! `vtms run`: one scenario to a CSV trace.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use vtms_core::harness::{
    read_scenario_file, run_scenario_with, write_header, RunOptions, RunSummary,
};

use crate::CliError;

#[derive(Debug, Clone)]
pub struct RunArgs {
    pub scenario: PathBuf,
    pub trace: PathBuf,
    pub until_s: Option<f64>,
    pub state_file: Option<PathBuf>,
}

pub fn execute(args: &RunArgs) -> Result<RunSummary, CliError> {
    let until_ms = match args.until_s {
        None => None,
        Some(s) if s.is_finite() && s >= 0.0 => Some((s * 1000.0).round() as u64),
        Some(s) => {
            return Err(CliError::Validation(format!(
                "--until must be ≥ 0, got {s}"
            )))
        }
    };
    let scenario = read_scenario_file(&args.scenario)?;
    let options = RunOptions {
        until_ms,
        state_file: args.state_file.clone(),
    };

    let io_err = |e: std::io::Error| CliError::Io(format!("{}: {e}", args.trace.display()));
    let mut out = BufWriter::new(File::create(&args.trace).map_err(io_err)?);
    write_header(&mut out).map_err(io_err)?;
    let summary = run_scenario_with(&scenario, &options, |row| row.write_csv(&mut out))?;
    out.flush().map_err(io_err)?;
    log::info!(
        "{}: {} ticks, {} events, trace in {}",
        scenario.name,
        summary.ticks,
        summary.events_applied,
        args.trace.display()
    );
    Ok(summary)
}
