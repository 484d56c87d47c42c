use std::process::ExitCode;

fn main() -> ExitCode {
    suprec::cli::main()
}
