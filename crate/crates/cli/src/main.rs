use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use seqtrace_cli::{run, Cli};

fn main() -> ExitCode {
    let report = run(Cli::parse());
    // A closed pipe (e.g. `| head`) is not worth a panic.
    let _ = std::io::stdout().write_all(report.body.as_bytes());
    let _ = std::io::stderr().write_all(report.diagnostics.as_bytes());
    ExitCode::from(u8::try_from(report.exit_code).unwrap_or(2))
}
