use std::process::ExitCode;

fn main() -> ExitCode {
    fracdev::cli::main_entry(std::env::args_os())
}
