use std::process::ExitCode;

use yles_cli::{parse_config, run, ConfigError, RunError};

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let outcome = parse_config(&argv)
        .map_err(RunError::from)
        .and_then(|cfg| run(&cfg));
    match outcome {
        Ok(summary) => {
            println!("{}", summary.message);
            for p in &summary.outputs {
                println!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(RunError::Config(ConfigError::Help(text))) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
