use std::process::ExitCode;

use clap::Parser;
use hopf_ricci::cli::{execute, RunConfig};

fn main() -> ExitCode {
    let config = RunConfig::parse();
    ExitCode::from(execute(&config) as u8)
}
