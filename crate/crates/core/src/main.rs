use std::process::ExitCode;

fn main() -> ExitCode {
    hypk::cli::main_with_args(std::env::args_os())
}
