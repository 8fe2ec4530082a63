use std::io::Write;
use std::process::ExitCode;

use qentropy_cli::{io::write_file, parse_args, run};

fn main() -> ExitCode {
    let cfg = match parse_args(std::env::args_os()) {
        Ok(cfg) => cfg,
        Err(e) => e.exit(),
    };
    let outcome = match run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    match &cfg.output {
        Some(path) => {
            if let Err(e) = write_file(path, &outcome.output) {
                eprintln!("error: {e}");
                return ExitCode::from(e.exit_code());
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(outcome.output.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(2);
            }
        }
    }
    match outcome.failure {
        Some(reason) => {
            eprintln!("error: {reason}");
            ExitCode::from(1)
        }
        None => ExitCode::SUCCESS,
    }
}
