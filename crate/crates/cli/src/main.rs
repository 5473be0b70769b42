use clap::Parser;
use sbm_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("sbm: {err}");
        std::process::exit(err.exit_code());
    }
}
