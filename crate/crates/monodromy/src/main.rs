use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(monodromy::cli::run_command(std::env::args()) as u8)
}
