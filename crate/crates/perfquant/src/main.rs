use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use perfquant::{run, Cli, EXIT_ERROR};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { 0 });
        }
    };
    match run(cli) {
        Ok(outcome) => {
            let mut out = std::io::stdout().lock();
            let _ = writeln!(out, "{}", outcome.output.trim_end());
            ExitCode::from(outcome.exit_code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
