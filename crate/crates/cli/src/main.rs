use std::process::ExitCode;

use clap::Parser;
use smdpen_cli::{execute, Cli};

fn main() -> ExitCode {
    execute(&Cli::parse())
}
