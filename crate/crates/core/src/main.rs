use std::process::ExitCode;

fn main() -> ExitCode {
    tubeseg::cli::main()
}
