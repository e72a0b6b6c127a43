use std::panic;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use revrate::{run, Cli};

fn report(kind: &str, code: u8, message: &str) -> ExitCode {
    eprintln!(
        "{}",
        serde_json::json!({"error": kind, "exit_code": code, "message": message})
    );
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    panic::set_hook(Box::new(|_| {}));
    match panic::catch_unwind(|| run(&cli.command)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            let kind = match e.exit_code() {
                1 => "usage",
                2 => "data",
                _ => "internal",
            };
            report(kind, e.exit_code() as u8, &e.to_string())
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            report("internal", 3, &msg)
        }
    }
}
