use clap::Parser;
use spikelab::args::Cli;

fn main() {
    let cli = Cli::parse();
    if let Err(e) = spikelab::execute(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
