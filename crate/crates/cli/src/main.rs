use std::process::ExitCode;

fn main() -> ExitCode {
    lamvoc_cli::cli::main()
}
