use std::process::ExitCode;

fn main() -> ExitCode {
    hcf_fwm::cli::main_with_args(std::env::args_os())
}
