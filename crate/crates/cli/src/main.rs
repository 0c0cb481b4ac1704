use std::process::ExitCode;

fn main() -> ExitCode {
    dhss_cli::run(std::env::args_os())
}
