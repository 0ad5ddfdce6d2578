use clap::Parser;
use fundsol_cli::{run, Args};

fn main() {
    std::process::exit(run(&Args::parse()));
}
