use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use sphere_energy_cli::{run, Cli};

fn main() -> ExitCode {
    // clap prints usage and exits with status 2 on bad arguments
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.output.as_bytes()).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::from(out.exit_code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
