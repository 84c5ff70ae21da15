use clap::Parser;
use gyrosym::harness::{run, Cli};

fn main() {
    env_logger::init();
    std::process::exit(run(Cli::parse()));
}
