use std::process::ExitCode;

fn main() -> ExitCode {
    rateregion::cli::run(std::env::args_os())
}
