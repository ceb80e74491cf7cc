use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use rauzy_core::cli::{exit_code, run, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let code = match run(&cli, &mut out) {
        Ok(outcome) => outcome as u8,
        Err(e) => {
            eprintln!("rauzy: {e}");
            exit_code(&e) as u8
        }
    };
    let _ = out.flush();
    ExitCode::from(code)
}
