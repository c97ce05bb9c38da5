#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod error;

use std::process::ExitCode;

fn main() -> ExitCode {
    let result = args::parse(std::env::args_os().collect()).and_then(commands::run);
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(error::CliError::Usage(e)) => {
            let code = e.exit_code();
            let _ = e.print();
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
