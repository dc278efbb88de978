use clap::Parser;

use shearer_cli::args::Cli;

fn main() {
    // Usage errors exit 2 through clap; domain errors exit 1 here.
    let cli = Cli::parse();
    if let Err(err) = shearer_cli::run(cli) {
        eprintln!("error: {err}");
        std::process::exit(1);
    }
}
