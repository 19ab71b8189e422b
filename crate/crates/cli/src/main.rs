use std::process::ExitCode;

fn main() -> ExitCode {
    herald_tpc_cli::main_with(std::env::args_os())
}
