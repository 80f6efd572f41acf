use clap::Parser;
use patternquest::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
