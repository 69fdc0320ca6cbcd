use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(tempered::cli::run(std::env::args()) as u8)
}
