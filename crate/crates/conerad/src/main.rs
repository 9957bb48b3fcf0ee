use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(conerad::cli::run(std::env::args()) as u8)
}
