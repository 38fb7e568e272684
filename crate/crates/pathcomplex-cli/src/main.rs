use std::process::ExitCode;

use clap::Parser;
use pathcomplex_cli::run::{execute, full_output, out_path, Cli, Verdict};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0u8,
                _ => 1u8,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli.cmd) {
        Ok(outcome) => {
            let doc = full_output(&cli.cmd, &outcome);
            let text = serde_json::to_string_pretty(&doc).expect("report serializes");
            match out_path(&cli.cmd) {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, &text) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::from(1);
                    }
                    if let Some(csv) = &outcome.csv {
                        let cpath = path.with_extension("csv");
                        if let Err(e) = std::fs::write(&cpath, csv) {
                            eprintln!("error: cannot write {}: {e}", cpath.display());
                            return ExitCode::from(1);
                        }
                    }
                    println!(
                        "{}: {}",
                        path.display(),
                        doc.get("verdict").and_then(|v| v.as_str()).unwrap_or("?")
                    );
                }
                None => println!("{text}"),
            }
            match outcome.verdict {
                Verdict::Pass => ExitCode::from(0),
                Verdict::Fail => ExitCode::from(2),
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
