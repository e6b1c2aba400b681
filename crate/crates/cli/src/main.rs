use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use frechet_kit_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = run(&cli);
    let mut stdout = std::io::stdout().lock();
    if stdout.write_all(out.json.as_bytes()).is_err() {
        return ExitCode::from(frechet_kit_cli::EXIT_ERROR);
    }
    ExitCode::from(out.code)
}
