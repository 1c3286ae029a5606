use std::process::ExitCode;

fn main() -> ExitCode {
    sigqual::cli::run(std::env::args_os())
}
