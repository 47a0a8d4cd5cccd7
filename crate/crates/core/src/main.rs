use std::io::Write;
use std::process::ExitCode;

use cancelkit::cli::{dispatch, Invocation};

fn main() -> ExitCode {
    let mut out = std::io::stdout().lock();
    // A closed pipe is not an error worth reporting.
    match dispatch(std::env::args_os()) {
        Invocation::Display(text) => {
            let _ = write!(out, "{text}");
            ExitCode::SUCCESS
        }
        Invocation::Report { report, pretty } => {
            let _ = writeln!(out, "{}", report.render(pretty));
            ExitCode::from(report.status.exit_code() as u8)
        }
    }
}
