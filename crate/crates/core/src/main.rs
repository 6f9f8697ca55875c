use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use curvlab::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            if !out.stdout.is_empty() {
                // A closed pipe downstream is not an error of ours.
                let _ = writeln!(std::io::stdout().lock(), "{}", out.stdout.trim_end());
            }
            if let Some(note) = out.note {
                eprintln!("{note}");
            }
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
