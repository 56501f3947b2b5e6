use std::process::ExitCode;

use clap::Parser;
use hystherm::{execute, Cli};
use serde_json::json;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let body = json!({ "error": { "kind": "usage", "message": e.to_string().trim_end() } });
            eprintln!("{body}");
            return ExitCode::from(2);
        }
    };
    match execute(&cli) {
        Ok(summary) => {
            let status = if summary.passed { "passed" } else { "FAILED" };
            println!("{}: {status} ({})", summary.command, cli.out.join("summary.json").display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
