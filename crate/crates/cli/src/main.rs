use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use homquiver_cli::args::Command;
use homquiver_cli::{run, Cli, EXIT_INPUT};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_INPUT as u8);
        }
    };
    let json = serde_json::to_string_pretty(&out).expect("report serializes") + "\n";
    let summary = out.report.summary();
    let to_file = cli.global.out.as_ref().filter(|_| !matches!(cli.command, Command::Generate { .. }));
    match to_file {
        Some(path) => {
            if let Err(e) = std::fs::write(path, json) {
                eprintln!("input error: {}: {e}", path.display());
                return ExitCode::from(EXIT_INPUT as u8);
            }
            print!("{summary}");
        }
        None => {
            let mut so = std::io::stdout().lock();
            let _ = so.write_all(json.as_bytes());
            eprint!("{summary}");
        }
    }
    ExitCode::from(out.report.verdict.exit_code() as u8)
}
