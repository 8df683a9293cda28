use std::process::ExitCode;

use clap::Parser;
use frontal_forge::{dispatch, error_code, save_report, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(error_code(&e) as u8)
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<u8> {
    let report = dispatch(&cli.command)?;
    save_report(&report)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(report.status.exit_code() as u8)
}
