use std::path::PathBuf;

use spinelect::simnet::{read_trace, replay, ReplayReport, SimError};

use super::{CliError, CmdResult};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Trace file produced by `elect --trace` or `scenario`.
    pub trace: PathBuf,
}

pub fn run_cmd(args: Args) -> CmdResult {
    let (header, records) = read_trace(&args.trace)
        .map_err(|e| CliError::Usage(format!("reading {}: {e}", args.trace.display())))?;
    match replay(&header, &records) {
        Ok(ReplayReport::Identical { records }) => {
            println!("replay identical: {records} records match");
            Ok(())
        }
        Ok(ReplayReport::Diverged {
            line,
            recorded,
            replayed,
        }) => {
            println!("replay diverged at line {line}:");
            println!("  recorded: {recorded}");
            println!("  replayed: {replayed}");
            Err(CliError::Status(1))
        }
        Err(e @ SimError::BadFormatVersion { .. }) => Err(CliError::Usage(e.to_string())),
        Err(e) => Err(CliError::Runtime(format!("replay: {e}"))),
    }
}
