use std::process::ExitCode;

fn main() -> ExitCode {
    emr_dlt::cli::run(std::env::args_os())
}
