use clap::Parser;
use shiftcode::cli::{main_with, Cli};

fn main() -> std::process::ExitCode {
    main_with(Cli::parse())
}
